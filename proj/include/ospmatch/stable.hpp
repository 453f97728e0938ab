#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ospmatch/core.hpp"
#include "ospmatch/domain.hpp"

namespace ospmatch {

// A deterministic map from men's profiles to matchings.
struct MatchingRule {
    std::string label;
    std::function<Matching(const Profile&)> evaluate;
};

// Why a matching is unstable: a mutually-preferring pair, or someone holding
// a partner who is not on their list.
struct BlockingWitness {
    enum class Kind { Pair, UnacceptablePartner };
    Kind kind;
    AgentId first;                  // the man for Pair, the complaining agent otherwise
    std::optional<AgentId> second;  // the woman for Pair

    friend bool operator==(const BlockingWitness&, const BlockingWitness&) = default;
};

struct StabilityResult {
    bool stable;
    std::vector<BlockingWitness> witnesses;  // exhaustive when unstable
};

// Men a,b,c and women x,y with a >_x b >_x c >_y a.
struct CycleWitness {
    AgentId m_a, m_b, m_c;
    AgentId w_x, w_y;

    friend bool operator==(const CycleWitness&, const CycleWitness&) = default;
};

struct CyclicityResult {
    bool cyclical;
    std::optional<CycleWitness> witness;
};

struct StrategyProofnessViolation {
    AgentId agent;
    Profile truthful;        // full profile p̄
    PreferenceList deviation;  // p'_m with a strictly better outcome
    Outcome truthful_outcome;
    Outcome deviating_outcome;
};

struct StrategyProofnessResult {
    bool strategy_proof;
    std::optional<StrategyProofnessViolation> witness;
};

// No blocking pair and nobody matched off-list. Witness list is exhaustive.
StabilityResult is_stable(const Matching& mu, const Profile& men_prefs, const Profile& women_prefs,
                          const Market& market);

// Men-proposing deferred acceptance: the M-optimal stable matching for (p, q).
// The result does not depend on the internal proposal order.
Matching deferred_acceptance(const Profile& men_prefs, const Profile& women_prefs,
                             const Market& market);

// Same algorithm with an explicit initial proposal queue, used to test order
// invariance. `order` must be a permutation of the market's men.
Matching deferred_acceptance_with_order(const Profile& men_prefs, const Profile& women_prefs,
                                        const Market& market, const std::vector<AgentId>& order);

// Women-proposing variant; yields the W-optimal stable matching.
Matching women_proposing_da(const Profile& men_prefs, const Profile& women_prefs,
                            const Market& market);

// Every stable matching, by brute force over all partial matchings.
// Guarded: throws GuardExceeded beyond 6x6.
std::vector<Matching> enumerate_stable(const Profile& men_prefs, const Profile& women_prefs,
                                       const Market& market);

// Checks the rule on every profile of `domain` and every unilateral deviation
// inside it. Guarded by total evaluation count.
StrategyProofnessResult is_strategy_proof(const MatchingRule& rule, const DomainProduct& domain,
                                          std::size_t guard = 2'000'000);

// Ergin cycle detection on a women's profile.
CyclicityResult is_cyclical(const Profile& women_prefs, const Market& market);

// Built-in rules for the CLI: "da", "constant-empty", "women-proposing-da".
// All close over a fixed women's profile (ignored by constant-empty).
MatchingRule make_rule(const std::string& name, const Market& market);

}  // namespace ospmatch
