#pragma once

#include <functional>

#include "ospmatch/mechanism.hpp"
#include "ospmatch/stable.hpp"

namespace ospmatch {

// Turns a family of one-side-querying mechanisms, one per women's profile,
// into a two-sides-querying mechanism: women are asked for their whole lists
// in canonical order, then the builder's tree for the reported profile is
// grafted under each interim leaf. Throws if the builder fails on any profile
// of `women_domain` (builder partial).
MechanismTree lift(const std::function<MechanismTree(const Profile&)>& builder,
                   const Market& market, const DomainProduct& women_domain);

// Convenience overload: women's domain = all full lists.
MechanismTree lift(const std::function<MechanismTree(const Profile&)>& builder,
                   const Market& market);

struct TwoSidedStabilityWitness {
    Profile men_profile;
    Profile women_profile;
    std::vector<BlockingWitness> blocking;
};

struct TwoSidedStabilityResult {
    bool stable;
    std::optional<TwoSidedStabilityWitness> witness;
};

// Exhaustively checks that the implemented rule is stable with respect to
// every (men, women) profile pair in the mechanism's domains. Requires every
// market participant to be strategic. Guarded by the domain product size.
TwoSidedStabilityResult verify_two_sided_stability(const MechanismTree& mech, const Market& market,
                                                   std::size_t guard = 1'000'000);

}  // namespace ospmatch
