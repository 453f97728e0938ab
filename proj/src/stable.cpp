#include "ospmatch/stable.hpp"

#include <deque>

namespace ospmatch {

StabilityResult is_stable(const Matching& mu, const Profile& men_prefs, const Profile& women_prefs,
                          const Market& market) {
    validate_matching(mu, market);
    std::vector<BlockingWitness> witnesses;

    for (const auto& [m, w] : mu.pairs()) {
        if (!men_prefs.at(m).contains(w))
            witnesses.push_back({BlockingWitness::Kind::UnacceptablePartner, m, std::nullopt});
        if (!women_prefs.at(w).contains(m))
            witnesses.push_back({BlockingWitness::Kind::UnacceptablePartner, w, std::nullopt});
    }

    for (const auto& m : market.men) {
        Outcome mu_m = mu.partner_of(m);
        for (const auto& w : market.women) {
            if (mu_m == Outcome{w}) continue;
            Outcome mu_w = mu.partner_of(w);
            if (strictly_prefers_outcome(men_prefs.at(m), w, mu_m) &&
                strictly_prefers_outcome(women_prefs.at(w), m, mu_w))
                witnesses.push_back({BlockingWitness::Kind::Pair, m, w});
        }
    }
    return {witnesses.empty(), std::move(witnesses)};
}

Matching deferred_acceptance_with_order(const Profile& men_prefs, const Profile& women_prefs,
                                        const Market& market, const std::vector<AgentId>& order) {
    validate_profile(men_prefs, market, Side::Man);
    validate_profile(women_prefs, market, Side::Woman);
    if (order.size() != market.men.size())
        throw std::invalid_argument("proposal order must cover every man exactly once");

    std::map<AgentId, std::size_t> next_proposal;
    std::map<AgentId, AgentId> held;  // woman -> tentatively held man
    std::deque<AgentId> queue(order.begin(), order.end());

    while (!queue.empty()) {
        AgentId m = queue.front();
        queue.pop_front();
        const auto& list = men_prefs.at(m).ranked();
        std::size_t& next = next_proposal[m];
        while (next < list.size()) {
            const AgentId& w = list[next++];
            const auto& wl = women_prefs.at(w);
            if (!wl.contains(m)) continue;  // w rejects off-list proposers
            auto it = held.find(w);
            if (it == held.end()) {
                held.emplace(w, m);
                break;
            }
            if (prefers(wl, m, it->second)) {
                queue.push_back(it->second);
                it->second = m;
                break;
            }
        }
    }

    std::vector<std::pair<AgentId, AgentId>> pairs;
    for (const auto& [w, m] : held) pairs.emplace_back(m, w);
    return Matching(std::move(pairs));
}

Matching deferred_acceptance(const Profile& men_prefs, const Profile& women_prefs,
                             const Market& market) {
    return deferred_acceptance_with_order(men_prefs, women_prefs, market, market.men);
}

Matching women_proposing_da(const Profile& men_prefs, const Profile& women_prefs,
                            const Market& market) {
    Market flipped;
    for (const auto& w : market.women) flipped.men.push_back({Side::Man, w.name});
    for (const auto& m : market.men) flipped.women.push_back({Side::Woman, m.name});

    auto flip_profile = [](const Profile& p, Side new_side) {
        std::map<AgentId, PreferenceList> lists;
        for (const auto& [agent, list] : p.lists()) {
            std::vector<AgentId> ranked;
            for (const auto& e : list.ranked()) ranked.push_back({opposite(new_side), e.name});
            lists.emplace(AgentId{new_side, agent.name}, PreferenceList(std::move(ranked)));
        }
        return Profile(std::move(lists));
    };
    Profile proposers = flip_profile(women_prefs, Side::Man);
    Profile receivers = flip_profile(men_prefs, Side::Woman);
    flipped.women_profile = receivers;
    Matching flipped_mu = deferred_acceptance(proposers, receivers, flipped);

    std::vector<std::pair<AgentId, AgentId>> pairs;
    for (const auto& [fw, fm] : flipped_mu.pairs())
        pairs.emplace_back(man(fm.name), woman(fw.name));
    return Matching(std::move(pairs));
}

namespace {

void all_matchings(const std::vector<AgentId>& men, const std::vector<AgentId>& women,
                   std::size_t man_idx, std::vector<bool>& woman_used,
                   std::vector<std::pair<AgentId, AgentId>>& current,
                   std::vector<Matching>& out) {
    if (man_idx == men.size()) {
        out.push_back(Matching(current));
        return;
    }
    all_matchings(men, women, man_idx + 1, woman_used, current, out);  // man unmatched
    for (std::size_t i = 0; i < women.size(); ++i) {
        if (woman_used[i]) continue;
        woman_used[i] = true;
        current.emplace_back(men[man_idx], women[i]);
        all_matchings(men, women, man_idx + 1, woman_used, current, out);
        current.pop_back();
        woman_used[i] = false;
    }
}

}  // namespace

std::vector<Matching> enumerate_stable(const Profile& men_prefs, const Profile& women_prefs,
                                       const Market& market) {
    if (market.men.size() > 6 || market.women.size() > 6)
        throw GuardExceeded("stable-set enumeration is limited to 6x6 markets");
    std::vector<Matching> all;
    std::vector<bool> used(market.women.size(), false);
    std::vector<std::pair<AgentId, AgentId>> current;
    all_matchings(market.men, market.women, 0, used, current, all);

    std::vector<Matching> stable;
    for (const auto& mu : all)
        if (is_stable(mu, men_prefs, women_prefs, market).stable) stable.push_back(mu);
    std::sort(stable.begin(), stable.end());
    return stable;
}

StrategyProofnessResult is_strategy_proof(const MatchingRule& rule, const DomainProduct& domain,
                                          std::size_t guard) {
    std::size_t deviations = 0;
    for (const auto& [_, lists] : domain.sets()) deviations += lists.size();
    if (domain.profile_count() > guard / std::max<std::size_t>(deviations, 1))
        throw GuardExceeded("strategy-proofness check domain too large");

    auto profiles = domain.enumerate_profiles(guard);
    for (const auto& p : profiles) {
        Matching mu = rule.evaluate(p);
        for (const auto& [agent, lists] : domain.sets()) {
            const PreferenceList& truthful = p.at(agent);
            Outcome own = mu.partner_of(agent);
            for (const auto& dev : lists) {
                if (dev == truthful) continue;
                Matching alt = rule.evaluate(p.with(agent, dev));
                Outcome alt_own = alt.partner_of(agent);
                if (strictly_prefers_outcome(truthful, alt_own, own))
                    return {false, StrategyProofnessViolation{agent, p, dev, own, alt_own}};
            }
        }
    }
    return {true, std::nullopt};
}

CyclicityResult is_cyclical(const Profile& women_prefs, const Market& market) {
    validate_profile(women_prefs, market, Side::Woman);
    for (const auto& x : market.women) {
        const auto& qx = women_prefs.at(x);
        for (const auto& a : market.men)
            for (const auto& b : market.men) {
                if (b == a || !prefers(qx, a, b)) continue;
                for (const auto& c : market.men) {
                    if (c == a || c == b || !prefers(qx, b, c)) continue;
                    for (const auto& y : market.women) {
                        if (y == x) continue;
                        if (prefers(women_prefs.at(y), c, a))
                            return {true, CycleWitness{a, b, c, x, y}};
                    }
                }
            }
    }
    return {false, std::nullopt};
}

MatchingRule make_rule(const std::string& name, const Market& market) {
    if (name == "da") {
        return {"da", [market](const Profile& p) {
                    return deferred_acceptance(p, market.women_profile, market);
                }};
    }
    if (name == "constant-empty") {
        return {"constant-empty", [](const Profile&) { return Matching{}; }};
    }
    if (name == "women-proposing-da") {
        return {"women-proposing-da", [market](const Profile& p) {
                    return women_proposing_da(p, market.women_profile, market);
                }};
    }
    throw std::invalid_argument("unknown rule: " + name);
}

}  // namespace ospmatch
