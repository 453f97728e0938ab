#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// restate definitions directly and stay independent of the library's
// implementation paths.

#include <string>
#include <vector>

#include "ospmatch/experiments.hpp"
#include "ospmatch/mechanism.hpp"
#include "ospmatch/osp.hpp"
#include "ospmatch/rng.hpp"
#include "ospmatch/stable.hpp"
#include "ospmatch/synthesis.hpp"

namespace ospmatch::testsupport {

// Single-letter list builders: wl("zyx") ranks women z > y > x.
inline PreferenceList wl(const std::string& s) {
    std::vector<AgentId> v;
    for (char c : s) v.push_back(woman(std::string(1, c)));
    return PreferenceList(std::move(v));
}
inline PreferenceList ml(const std::string& s) {
    std::vector<AgentId> v;
    for (char c : s) v.push_back(man(std::string(1, c)));
    return PreferenceList(std::move(v));
}

inline Profile men_profile(std::vector<std::pair<std::string, std::string>> entries) {
    Profile p;
    for (auto& [name, lists] : entries) p.set(man(name), wl(lists));
    return p;
}
inline Profile women_profile(std::vector<std::pair<std::string, std::string>> entries) {
    Profile p;
    for (auto& [name, lists] : entries) p.set(woman(name), ml(lists));
    return p;
}

inline Matching match(std::vector<std::pair<std::string, std::string>> pairs) {
    std::vector<std::pair<AgentId, AgentId>> v;
    for (auto& [m, w] : pairs) v.emplace_back(man(m), woman(w));
    return Matching(std::move(v));
}

// The 3x3 rotation market: x: a>b>c, y: b>c>a, z: c>a>b.
inline Market rotation_market_3x3() {
    return Market::make({"a", "b", "c"}, {"x", "y", "z"},
                        {{"x", {"a", "b", "c"}}, {"y", {"b", "c", "a"}}, {"z", {"c", "a", "b"}}});
}

// The restricted two-list domains used against the rotation market.
inline DomainProduct rotation_restricted_domains() {
    return DomainProduct{{{man("a"), {wl("zyx"), wl("yxz")}},
                          {man("b"), {wl("xzy"), wl("zyx")}},
                          {man("c"), {wl("yxz"), wl("xzy")}}}};
}

// The "less cyclical" 3x3 market: x: a>c>b, y: a>c>b, z: b>a>c.
inline Market less_cyclical_market_3x3() {
    return Market::make({"a", "b", "c"}, {"x", "y", "z"},
                        {{"x", {"a", "c", "b"}}, {"y", {"a", "c", "b"}}, {"z", {"b", "a", "c"}}});
}

// Its 2x3x2 restricted domains.
inline DomainProduct less_cyclical_domains() {
    return DomainProduct{{{man("a"), {wl("zxy"), wl("zyx")}},
                          {man("b"), {wl("yzx"), wl("xzy"), wl("xyz")}},
                          {man("c"), {wl("xyz"), wl("yxz")}}}};
}

// 2x2 market behind the two-question tree: x: a>b, y: b>a.
inline Market opposed_market_2x2() {
    return Market::make({"a", "b"}, {"x", "y"}, {{"x", {"a", "b"}}, {"y", {"b", "a"}}});
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

// Ergin cycle detection straight from rank positions.
inline bool cyclical_by_ranks(const Profile& q, const Market& market) {
    auto pref = [](std::optional<std::size_t> ru, std::optional<std::size_t> rv) {
        return (ru && rv && *ru < *rv) || (ru && !rv);
    };
    for (const auto& x : market.women)
        for (const auto& y : market.women) {
            if (x == y) continue;
            const auto& qx = q.at(x);
            const auto& qy = q.at(y);
            for (const auto& a : market.men)
                for (const auto& b : market.men)
                    for (const auto& c : market.men) {
                        if (a == b || b == c || a == c) continue;
                        if (pref(qx.rank_of(a), qx.rank_of(b)) &&
                            pref(qx.rank_of(b), qx.rank_of(c)) &&
                            pref(qy.rank_of(c), qy.rank_of(a)))
                            return true;
                    }
        }
    return false;
}

// The OSP definition expanded literally: all profile pairs, all nodes.
inline bool osp_by_definition(const MechanismTree& mech, const std::vector<AgentId>& for_agents,
                              std::size_t guard = 200'000) {
    auto profiles = mech.domains.enumerate_profiles(guard);
    std::vector<std::pair<Matching, std::vector<int>>> traced;
    traced.reserve(profiles.size());
    for (const auto& p : profiles) {
        auto [mu, trace] = evaluate(mech, p);
        traced.emplace_back(std::move(mu), std::move(trace.path));
    }
    auto passes = [](const std::vector<int>& path, int node_id) {
        return std::find(path.begin(), path.end(), node_id) != path.end();
    };
    for (const auto& agent : for_agents)
        for (std::size_t i = 0; i < mech.nodes.size(); ++i) {
            const auto& n = mech.nodes[i];
            if (!n.actor || !(*n.actor == agent)) continue;
            for (std::size_t pi = 0; pi < profiles.size(); ++pi)
                for (std::size_t qi = 0; qi < profiles.size(); ++qi) {
                    if (!passes(traced[pi].second, n.id) || !passes(traced[qi].second, n.id))
                        continue;
                    const auto& truthful = profiles[pi].at(agent);
                    const auto& other = profiles[qi].at(agent);
                    if (!diverge(mech, n.id, truthful, other)) continue;
                    Outcome mine = traced[pi].first.partner_of(agent);
                    Outcome theirs = traced[qi].first.partner_of(agent);
                    if (!weakly_prefers_outcome(truthful, mine, theirs)) return false;
                }
        }
    return true;
}

// ---------------------------------------------------------------------------
// Random valid mechanisms (coverage holds by construction)
// ---------------------------------------------------------------------------

struct RandomMechanismConfig {
    std::size_t max_lists_per_agent = 3;
    double leaf_probability = 0.35;
};

inline Matching random_matching(const Market& market, SplitMix64& rng) {
    std::vector<AgentId> women = market.women;
    shuffle_deterministic(women, rng);
    std::vector<std::pair<AgentId, AgentId>> pairs;
    std::size_t wi = 0;
    for (const auto& m : market.men) {
        if (rng.below(3) == 0 || wi >= women.size()) continue;  // leave some unmatched
        pairs.emplace_back(m, women[wi++]);
    }
    return Matching(std::move(pairs));
}

inline MechanismTree random_mechanism(const Market& market, SplitMix64& rng,
                                      const RandomMechanismConfig& cfg = {}) {
    auto all = enumerate_preference_lists(market.women, false);
    std::map<AgentId, std::vector<PreferenceList>> sets;
    for (const auto& m : market.men) {
        std::vector<PreferenceList> pool = all;
        shuffle_deterministic(pool, rng);
        pool.resize(1 + rng.below(cfg.max_lists_per_agent));
        sets[m] = std::move(pool);
    }
    DomainProduct domains{std::move(sets)};

    MechanismTree t;
    t.men = market.men;
    t.women = market.women;
    t.domains = domains;

    struct Frame {
        std::map<AgentId, Predicate> residual;
        int parent;
        Predicate via;
    };

    std::function<void(Frame)> grow = [&](Frame f) {
        std::vector<AgentId> splittable;
        for (const auto& [a, pred] : f.residual)
            if (pred.size() >= 2) splittable.push_back(a);
        bool leaf = splittable.empty() || rng.below(100) < cfg.leaf_probability * 100;
        int idx = static_cast<int>(t.nodes.size());
        MechanismTree::Node node;
        node.id = idx;
        node.parent = f.parent;
        node.in_predicate = f.via;
        if (leaf) {
            node.leaf = random_matching(market, rng);
            t.nodes.push_back(std::move(node));
            if (f.parent == -1) t.root = idx; else t.nodes[f.parent].children.push_back(idx);
            return;
        }
        const AgentId actor = splittable[rng.below(splittable.size())];
        node.actor = actor;
        t.nodes.push_back(std::move(node));
        if (f.parent == -1) t.root = idx; else t.nodes[f.parent].children.push_back(idx);

        // Random partition of the residual into 2..n cells.
        const auto& lists = f.residual.at(actor).lists();
        std::size_t cells = 2 + rng.below(lists.size() - 1);
        std::vector<std::vector<PreferenceList>> grouped(cells);
        std::vector<std::size_t> order(lists.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle_deterministic(order, rng);
        for (std::size_t i = 0; i < order.size(); ++i)
            grouped[i < cells ? i : rng.below(cells)].push_back(lists[order[i]]);
        for (auto& cell : grouped) {
            Frame child{f.residual, idx, Predicate(cell)};
            child.residual[actor] = Predicate(cell);
            grow(std::move(child));
        }
    };

    Frame root;
    for (const auto& [a, lists] : domains.sets()) root.residual[a] = Predicate(lists);
    root.parent = -1;
    grow(std::move(root));
    return t;
}

}  // namespace ospmatch::testsupport
