#pragma once

#include <cstdint>

#include "ospmatch/mechanism.hpp"
#include "ospmatch/stable.hpp"

namespace ospmatch {

// Raised by constructions that require an acyclical women's profile.
struct CyclicalProfileError : std::invalid_argument {
    CycleWitness witness;
    explicit CyclicalProfileError(CycleWitness w)
        : std::invalid_argument("women's profile is cyclical: " + w.m_a.name + " >_" + w.w_x.name +
                                " " + w.m_b.name + " >_" + w.w_x.name + " " + w.m_c.name + " >_" +
                                w.w_y.name + " " + w.m_a.name),
          witness(std::move(w)) {}
};

// Result of the exhaustive decision procedure: either a mechanism that is OSP
// for every strategic agent and implements the target on its whole domain
// product, or a certificate that none exists, with the number of memoized
// search states visited.
struct SynthesisOutcome {
    bool feasible;
    std::optional<MechanismTree> mechanism;
    std::size_t explored_states = 0;
    DomainProduct domains;
    std::string target_label;
};

// Serial dictatorship for a market where all women share the list `q`: men are
// asked in q order for their top choice among the women still available, with
// a decline branch whenever their domain allows listing none of them.
// `domains` defaults to every ordered subset for every man.
MechanismTree serial_dictatorship(const PreferenceList& q, const Market& market,
                                  const std::optional<DomainProduct>& domains = std::nullopt);

// The 2x2 construction over full lists: delegates to serial dictatorship when
// both women agree, otherwise builds the two-question tree in which the first
// man either takes the woman who ranks him first or passes the move.
MechanismTree build_two_by_two(const Market& market);

// The recursive construction for acyclical women's profiles on balanced
// full-list markets. Rejects cyclical profiles with the detected cycle.
MechanismTree build_acyclical(const Market& market);

// The fixed six-step 3x3 mechanism for q_x: a>b>c, q_y: a>c>b, q_z: b>a>c,
// with 2x2 continuations. Returns the tree together with its market.
std::pair<MechanismTree, Market> fixture_example3();

// Direct-revelation tree: asks the agents of `domains` in canonical order with
// one edge per list; each leaf carries target() of its unique profile.
MechanismTree direct_revelation(const MatchingRule& target, const DomainProduct& domains,
                                const Market& market, std::size_t guard = 1'000'000);

// Complete memoized search over deterministic perfect-information mechanisms
// on `domains`: returns a mechanism iff one exists that is OSP for all
// strategic agents and implements `target`; otherwise certifies infeasibility.
// Feasible results are re-verified with the independent verifier before being
// returned. `profile_guard` bounds the domain product size.
SynthesisOutcome decide_osp(const MatchingRule& target, const DomainProduct& domains,
                            const Market& market, std::size_t profile_guard = 216);

}  // namespace ospmatch
