#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ospmatch/rng.hpp"
#include "ospmatch/stable.hpp"
#include "support/fixtures.hpp"

using namespace ospmatch;
using namespace ospmatch::testsupport;

namespace {

Market market_1x1() { return Market::make({"a"}, {"x"}, {{"x", {"a"}}}); }

}  // namespace

TEST_CASE("deferred acceptance on the rotation market") {
    Market m = rotation_market_3x3();
    // p2_a, p2_b, p1_c
    Profile p = men_profile({{"a", "yxz"}, {"b", "zyx"}, {"c", "yxz"}});
    CHECK(deferred_acceptance(p, m.women_profile, m) == match({{"a", "x"}, {"b", "z"}, {"c", "y"}}));

    // p1_a, p1_b, p2_c
    Profile p2 = men_profile({{"a", "zyx"}, {"b", "xzy"}, {"c", "xzy"}});
    CHECK(deferred_acceptance(p2, m.women_profile, m) == match({{"a", "y"}, {"b", "x"}, {"c", "z"}}));
}

TEST_CASE("deferred acceptance 1x1") {
    Market m = market_1x1();
    Profile p = men_profile({{"a", "x"}});
    CHECK(deferred_acceptance(p, m.women_profile, m) == match({{"a", "x"}}));

    Profile empty = men_profile({{"a", ""}});
    CHECK(deferred_acceptance(empty, m.women_profile, m).empty());
}

TEST_CASE("deferred acceptance is proposal-order invariant") {
    Market m = rotation_market_3x3();
    auto men_profiles = DomainProduct::full_lists(m, Side::Man).enumerate_profiles();
    SplitMix64 rng(7);
    std::size_t step = 11;  // spot-check a spread of profiles
    for (std::size_t i = 0; i < men_profiles.size(); i += step) {
        const Profile& p = men_profiles[i];
        Matching reference = deferred_acceptance(p, m.women_profile, m);
        std::vector<AgentId> order = m.men;
        for (int k = 0; k < 4; ++k) {
            shuffle_deterministic(order, rng);
            CHECK(deferred_acceptance_with_order(p, m.women_profile, m, order) == reference);
        }
    }
}

TEST_CASE("DA handles partial lists and off-list proposals") {
    Market m = Market::make({"a", "b"}, {"x", "y"}, {{"x", {"a"}}, {"y", {"b"}}});
    // b lists only x, whom he cannot get: he ends unmatched.
    Profile p = men_profile({{"a", "xy"}, {"b", "x"}});
    CHECK(deferred_acceptance(p, m.women_profile, m) == match({{"a", "x"}}));
}

TEST_CASE("is_stable on paper and constructed cases") {
    Market m = rotation_market_3x3();
    Profile p = men_profile({{"a", "yxz"}, {"b", "zyx"}, {"c", "yxz"}});
    auto res = is_stable(match({{"a", "x"}, {"b", "z"}, {"c", "y"}}), p, m.women_profile, m);
    CHECK(res.stable);

    // Aligned 2x2, both women rank a > b; swapping partners blocks on (a, x).
    Market aligned = Market::make({"a", "b"}, {"x", "y"}, {{"x", {"a", "b"}}, {"y", {"a", "b"}}});
    Profile p2 = men_profile({{"a", "xy"}, {"b", "xy"}});
    auto res2 = is_stable(match({{"a", "y"}, {"b", "x"}}), p2, aligned.women_profile, aligned);
    CHECK_FALSE(res2.stable);
    REQUIRE(!res2.witnesses.empty());
    CHECK(res2.witnesses.front() ==
          BlockingWitness{BlockingWitness::Kind::Pair, man("a"), woman("x")});

    // Empty matching with mutual top choices blocks immediately.
    Market tiny = market_1x1();
    auto res3 = is_stable(Matching{}, men_profile({{"a", "x"}}), tiny.women_profile, tiny);
    CHECK_FALSE(res3.stable);
    CHECK(res3.witnesses.front() ==
          BlockingWitness{BlockingWitness::Kind::Pair, man("a"), woman("x")});
}

TEST_CASE("is_stable flags unacceptable partners") {
    Market m = Market::make({"a"}, {"x"}, {{"x", {"a"}}});
    Profile p = men_profile({{"a", ""}});  // a finds x unacceptable
    auto res = is_stable(match({{"a", "x"}}), p, m.women_profile, m);
    CHECK_FALSE(res.stable);
    REQUIRE(!res.witnesses.empty());
    CHECK(res.witnesses.front().kind == BlockingWitness::Kind::UnacceptablePartner);
    CHECK(res.witnesses.front().first == man("a"));
}

TEST_CASE("enumerate_stable: frozen 2x2 value and guard") {
    Market m = Market::make({"a", "b"}, {"x", "y"}, {{"x", {"b", "a"}}, {"y", {"a", "b"}}});
    Profile p = men_profile({{"a", "xy"}, {"b", "yx"}});
    auto stable = enumerate_stable(p, m.women_profile, m);
    REQUIRE(stable.size() == 2);
    CHECK(stable[0] == match({{"a", "x"}, {"b", "y"}}));
    CHECK(stable[1] == match({{"a", "y"}, {"b", "x"}}));

    Market tiny = market_1x1();
    auto only = enumerate_stable(men_profile({{"a", "x"}}), tiny.women_profile, tiny);
    REQUIRE(only.size() == 1);
    CHECK(only[0] == match({{"a", "x"}}));

    std::vector<std::string> many;
    for (char c = 'a'; c <= 'g'; ++c) many.push_back(std::string(1, c));
    Market big = Market::make(many, {"x"}, {{"x", {"a"}}});
    CHECK_THROWS_AS(enumerate_stable(Profile{}, big.women_profile, big), GuardExceeded);
}

TEST_CASE("rotation market stable set contains the DA outcome") {
    Market m = rotation_market_3x3();
    Profile p = men_profile({{"a", "yxz"}, {"b", "zyx"}, {"c", "yxz"}});
    auto stable = enumerate_stable(p, m.women_profile, m);
    Matching da = deferred_acceptance(p, m.women_profile, m);
    CHECK(std::find(stable.begin(), stable.end(), da) != stable.end());
}

TEST_CASE("DA is stable and M-optimal across random 4x4 pairs") {
    Market m = Market::make({"a", "b", "c", "d"}, {"u", "x", "y", "z"},
                            {{"u", {"a", "b", "c", "d"}},
                             {"x", {"a", "b", "c", "d"}},
                             {"y", {"a", "b", "c", "d"}},
                             {"z", {"a", "b", "c", "d"}}});
    auto men_lists = enumerate_preference_lists(m.women, false);
    auto women_lists = enumerate_preference_lists(m.men, false);
    SplitMix64 rng(2024);
    for (int t = 0; t < 60; ++t) {
        Profile p, q;
        for (const auto& mm : m.men) p.set(mm, men_lists[rng.below(men_lists.size())]);
        for (const auto& ww : m.women) q.set(ww, women_lists[rng.below(women_lists.size())]);
        Matching da = deferred_acceptance(p, q, m);
        CHECK(is_stable(da, p, q, m).stable);
        auto stable = enumerate_stable(p, q, m);
        CHECK(std::find(stable.begin(), stable.end(), da) != stable.end());
        for (const auto& mu : stable)
            for (const auto& mm : m.men)
                CHECK(weakly_prefers_outcome(p.at(mm), da.partner_of(mm), mu.partner_of(mm)));
    }
}

TEST_CASE("strategy-proofness: DA yes, women-proposing no, constant yes") {
    Market m2 = Market::make({"a", "b"}, {"x", "y"}, {{"x", {"b", "a"}}, {"y", {"a", "b"}}});
    DomainProduct full2 = DomainProduct::full_lists(m2, Side::Man);
    CHECK(is_strategy_proof(make_rule("da", m2), full2).strategy_proof);

    // The profitable manipulation against the women-optimal rule is a
    // truncation, so the whole domain (partial lists included) is needed.
    Market m3 = rotation_market_3x3();
    DomainProduct all3 = DomainProduct::all_lists(m3, Side::Man);
    auto res = is_strategy_proof(make_rule("women-proposing-da", m3), all3);
    CHECK_FALSE(res.strategy_proof);
    REQUIRE(res.witness.has_value());
    // The witness must be a genuine profitable deviation.
    MatchingRule rule = make_rule("women-proposing-da", m3);
    Matching truthful = rule.evaluate(res.witness->truthful);
    Matching deviated =
        rule.evaluate(res.witness->truthful.with(res.witness->agent, res.witness->deviation));
    CHECK(strictly_prefers_outcome(res.witness->truthful.at(res.witness->agent),
                                   deviated.partner_of(res.witness->agent),
                                   truthful.partner_of(res.witness->agent)));

    CHECK(is_strategy_proof(make_rule("constant-empty", m3), DomainProduct::full_lists(m3, Side::Man)).strategy_proof);
}

TEST_CASE("DA with a fixed full-list q is strategy-proof on every 3x3 q") {
    Market m = rotation_market_3x3();
    auto q_profiles = DomainProduct::full_lists(m, Side::Woman).enumerate_profiles();
    DomainProduct full = DomainProduct::full_lists(m, Side::Man);
    for (const auto& q : q_profiles) {
        Market mk = m;
        mk.women_profile = q;
        CHECK(is_strategy_proof(make_rule("da", mk), full).strategy_proof);
    }
}

TEST_CASE("cyclicity detection") {
    Market ex3 = Market::make({"a", "b", "c"}, {"x", "y", "z"},
                              {{"x", {"a", "b", "c"}}, {"y", {"a", "c", "b"}}, {"z", {"b", "a", "c"}}});
    auto res = is_cyclical(ex3.women_profile, ex3);
    CHECK(res.cyclical);
    REQUIRE(res.witness.has_value());
    CHECK(*res.witness == CycleWitness{man("a"), man("c"), man("b"), woman("y"), woman("z")});

    Market aligned = Market::make({"a", "b", "c"}, {"x", "y", "z"},
                                  {{"x", {"b", "a", "c"}}, {"y", {"b", "a", "c"}}, {"z", {"b", "a", "c"}}});
    CHECK_FALSE(is_cyclical(aligned.women_profile, aligned).cyclical);

    Market rot = rotation_market_3x3();
    CHECK(is_cyclical(rot.women_profile, rot).cyclical);
}

TEST_CASE("cyclicity agrees with the rank oracle on all 216 full profiles") {
    Market m = rotation_market_3x3();
    auto q_profiles = DomainProduct::full_lists(m, Side::Woman).enumerate_profiles();
    REQUIRE(q_profiles.size() == 216);
    for (const auto& q : q_profiles) {
        Market mk = m;
        mk.women_profile = q;
        auto res = is_cyclical(q, mk);
        CHECK(res.cyclical == cyclical_by_ranks(q, mk));
        if (res.cyclical) {
            // Witness really is a cycle.
            const auto& w = *res.witness;
            CHECK(prefers(q.at(w.w_x), w.m_a, w.m_b));
            CHECK(prefers(q.at(w.w_x), w.m_b, w.m_c));
            CHECK(prefers(q.at(w.w_y), w.m_c, w.m_a));
        }
    }
}
