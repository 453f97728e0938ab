#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ospmatch/json_io.hpp"
#include "ospmatch/mechanism.hpp"
#include "ospmatch/synthesis.hpp"
#include "support/fixtures.hpp"

using namespace ospmatch;
using namespace ospmatch::testsupport;

namespace {

// The two-question 2x2 tree assembled by hand, ids as written.
MechanismTree fig1_by_hand() {
    Market m = opposed_market_2x2();
    DomainProduct domains = DomainProduct::full_lists(m, Side::Man);
    return MechanismTree::assemble(
        m.men, m.women, domains,
        {{0, man("a")}, {1, std::nullopt}, {2, man("b")}, {3, std::nullopt}, {4, std::nullopt}},
        {{1, match({{"a", "x"}, {"b", "y"}})},
         {3, match({{"a", "x"}, {"b", "y"}})},
         {4, match({{"a", "y"}, {"b", "x"}})}},
        {{0, 1, Predicate{{wl("xy")}}},
         {0, 2, Predicate{{wl("yx")}}},
         {2, 3, Predicate{{wl("yx")}}},
         {2, 4, Predicate{{wl("xy")}}}});
}

}  // namespace

TEST_CASE("assemble rejects broken structure") {
    Market m = opposed_market_2x2();
    DomainProduct d = DomainProduct::full_lists(m, Side::Man);
    // duplicate id
    CHECK_THROWS_AS(MechanismTree::assemble(m.men, m.women, d, {{0, man("a")}, {0, man("b")}}, {},
                                            {}),
                    std::invalid_argument);
    // two roots / orphan
    CHECK_THROWS_AS(MechanismTree::assemble(m.men, m.women, d,
                                            {{0, std::nullopt}, {1, std::nullopt}},
                                            {{0, Matching{}}, {1, Matching{}}}, {}),
                    std::invalid_argument);
    // cycle
    CHECK_THROWS_AS(MechanismTree::assemble(m.men, m.women, d, {{0, man("a")}, {1, man("b")}}, {},
                                            {{0, 1, Predicate{{wl("xy")}}},
                                             {1, 0, Predicate{{wl("xy")}}}}),
                    std::invalid_argument);
    // edge out of a leaf
    CHECK_THROWS_AS(MechanismTree::assemble(m.men, m.women, d,
                                            {{0, std::nullopt}, {1, std::nullopt}},
                                            {{0, Matching{}}, {1, Matching{}}},
                                            {{0, 1, Predicate{{wl("xy")}}}}),
                    std::invalid_argument);
}

TEST_CASE("the hand-built 2x2 tree is valid") {
    MechanismTree mech = fig1_by_hand();
    auto v = validate(mech);
    CHECK(v.valid);
    CHECK(v.violations.empty());
}

TEST_CASE("validate localizes definition violations") {
    Market m = opposed_market_2x2();
    DomainProduct d = DomainProduct::full_lists(m, Side::Man);

    // Overlapping sibling predicates at the root (and coverage broken too).
    auto overlapping = MechanismTree::assemble(
        m.men, m.women, d, {{0, man("a")}, {1, std::nullopt}, {2, std::nullopt}},
        {{1, match({{"a", "x"}, {"b", "y"}})}, {2, match({{"a", "y"}, {"b", "x"}})}},
        {{0, 1, Predicate{{wl("xy"), wl("yx")}}}, {0, 2, Predicate{{wl("yx")}}}});
    auto v = validate(overlapping);
    CHECK_FALSE(v.valid);
    bool overlap_flagged = false;
    for (const auto& viol : v.violations)
        if (viol.node_id == 0 && viol.message.find("overlap") != std::string::npos)
            overlap_flagged = true;
    CHECK(overlap_flagged);

    // Sibling union strictly smaller than the residual.
    auto undercover = MechanismTree::assemble(
        m.men, m.women, d, {{0, man("a")}, {1, std::nullopt}},
        {{1, match({{"a", "x"}, {"b", "y"}})}}, {{0, 1, Predicate{{wl("xy")}}}});
    auto v2 = validate(undercover);
    CHECK_FALSE(v2.valid);
    REQUIRE(!v2.violations.empty());
    CHECK(v2.violations.front().node_id == 0);

    // A leaf matching mentioning an agent outside the market.
    auto bad_leaf = MechanismTree::assemble(
        m.men, m.women, d, {{0, std::nullopt}}, {{0, match({{"q", "x"}})}}, {});
    CHECK_FALSE(validate(bad_leaf).valid);
}

TEST_CASE("single-leaf tree is valid and constant") {
    Market m = opposed_market_2x2();
    DomainProduct d = DomainProduct::full_lists(m, Side::Man);
    auto leaf_only =
        MechanismTree::assemble(m.men, m.women, d, {{0, std::nullopt}}, {{0, Matching{}}}, {});
    CHECK(validate(leaf_only).valid);
    for (const auto& p : d.enumerate_profiles())
        CHECK(evaluate(leaf_only, p).first == Matching{});
}

TEST_CASE("evaluate follows the paper's 2x2 tree") {
    MechanismTree mech = fig1_by_hand();
    for (const auto& pb : {wl("xy"), wl("yx")}) {
        Profile p = men_profile({{"a", "xy"}, {"b", ""}});
        p.set(man("b"), pb);
        auto [mu, trace] = evaluate(mech, p);
        CHECK(mu == match({{"a", "x"}, {"b", "y"}}));
        CHECK(trace.path == std::vector<int>{0, 1});
    }
    Profile p = men_profile({{"a", "yx"}, {"b", "xy"}});
    auto [mu, trace] = evaluate(mech, p);
    CHECK(mu == match({{"a", "y"}, {"b", "x"}}));
    CHECK(trace.path == std::vector<int>{0, 2, 4});

    Profile p2 = men_profile({{"a", "yx"}, {"b", "yx"}});
    CHECK(evaluate(mech, p2).first == match({{"a", "x"}, {"b", "y"}}));
}

TEST_CASE("evaluate rejects off-domain profiles") {
    MechanismTree mech = fig1_by_hand();
    Profile p = men_profile({{"a", "x"}, {"b", "xy"}});  // partial list not in the domain
    CHECK_THROWS_AS(evaluate(mech, p), std::invalid_argument);
}

TEST_CASE("prune to a single branch collapses to a leaf") {
    MechanismTree mech = fig1_by_hand();
    DomainProduct restricted = mech.domains.with(man("a"), {wl("xy")});
    MechanismTree pruned = prune(mech, restricted);
    CHECK(pruned.nodes.size() == 1);
    CHECK(pruned.is_leaf(pruned.root));
    CHECK(*pruned.node(pruned.root).leaf == match({{"a", "x"}, {"b", "y"}}));
    CHECK(validate(pruned).valid);
}

TEST_CASE("identity pruning preserves the implemented rule") {
    MechanismTree mech = fig1_by_hand();
    MechanismTree pruned = prune(mech, mech.domains);
    CHECK(validate(pruned).valid);
    for (const auto& p : mech.domains.enumerate_profiles())
        CHECK(evaluate(pruned, p).first == evaluate(mech, p).first);
}

TEST_CASE("prune soundness on random mechanisms") {
    Market m = opposed_market_2x2();
    SplitMix64 rng(91);
    int checked = 0;
    for (int t = 0; t < 120; ++t) {
        MechanismTree mech = random_mechanism(m, rng);
        REQUIRE(validate(mech).valid);

        // Random nonempty pointwise subset of the domains.
        std::map<AgentId, std::vector<PreferenceList>> sub;
        for (const auto& [agent, lists] : mech.domains.sets()) {
            std::vector<PreferenceList> keep;
            for (const auto& l : lists)
                if (rng.below(2)) keep.push_back(l);
            if (keep.empty()) keep.push_back(lists[rng.below(lists.size())]);
            sub[agent] = std::move(keep);
        }
        DomainProduct restricted{sub};
        MechanismTree pruned = prune(mech, restricted);
        CHECK(validate(pruned).valid);
        CHECK(pruned.domains == restricted);
        for (const auto& p : restricted.enumerate_profiles()) {
            CHECK(evaluate(pruned, p).first == evaluate(mech, p).first);
            ++checked;
        }
    }
    CHECK(checked > 150);
}

TEST_CASE("mechanism JSON round-trip") {
    MechanismTree mech = fig1_by_hand();
    json j = mechanism_to_json(mech);
    MechanismTree back = mechanism_from_json(j);
    CHECK(back == mech);

    // Round-trip also for a random mechanism with partial lists in domains.
    Market m = opposed_market_2x2();
    SplitMix64 rng(5);
    MechanismTree r = random_mechanism(m, rng);
    CHECK(mechanism_from_json(mechanism_to_json(r)) == r);
}

TEST_CASE("DOT export shape") {
    MechanismTree mech = fig1_by_hand();
    std::string dot = export_dot(mech);
    CHECK(std::count(dot.begin(), dot.end(), '\n') > 5);
    CHECK(dot.find("shape=circle") != std::string::npos);
    std::size_t boxes = 0, arrows = 0;
    for (std::size_t pos = 0; (pos = dot.find("shape=box", pos)) != std::string::npos; ++pos) ++boxes;
    for (std::size_t pos = 0; (pos = dot.find("->", pos)) != std::string::npos; ++pos) ++arrows;
    CHECK(boxes == 3);   // three leaves
    CHECK(arrows == 4);  // four edges
    CHECK(export_dot(mech) == dot);  // deterministic

    Market m = opposed_market_2x2();
    DomainProduct d = DomainProduct::full_lists(m, Side::Man);
    auto leaf_only =
        MechanismTree::assemble(m.men, m.women, d, {{0, std::nullopt}}, {{0, Matching{}}}, {});
    std::string leaf_dot = export_dot(leaf_only);
    CHECK(leaf_dot.find("->") == std::string::npos);

    // Serial dictatorship over full lists: the first dictator picks among 3.
    Market aligned = Market::make({"a", "b", "c"}, {"x", "y", "z"},
                                  {{"x", {"a", "b", "c"}}, {"y", {"a", "b", "c"}}, {"z", {"a", "b", "c"}}});
    MechanismTree sd = serial_dictatorship(aligned.women_profile.at(woman("x")), aligned,
                                           DomainProduct::full_lists(aligned, Side::Man));
    CHECK(sd.node(sd.root).children.size() == 3);
    std::string sd_dot = export_dot(sd);
    CHECK(sd_dot.find("a-x") != std::string::npos);
}

TEST_CASE("residuals follow the last edge of the same actor") {
    MechanismTree mech = fig1_by_hand();
    CHECK(mech.residual_at(mech.index_of_id(0), man("a")) ==
          Predicate(mech.domains.at(man("a"))));
    CHECK(mech.residual_at(mech.index_of_id(2), man("a")) == Predicate{{wl("yx")}});
    CHECK(mech.residual_at(mech.index_of_id(2), man("b")) ==
          Predicate(mech.domains.at(man("b"))));
    CHECK(mech.residual_at(mech.index_of_id(4), man("b")) == Predicate{{wl("xy")}});
}
