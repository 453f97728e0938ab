#pragma once

#include <set>
#include <vector>

#include "ospmatch/mechanism.hpp"

namespace ospmatch {

// A concrete obvious-strategy-proofness violation: at `node_id`, acting
// truthfully per `truthful` can end at `truthful_outcome` while deviating to
// `deviating` can end at `deviating_outcome`, which the agent strictly prefers
// under the truthful list. Both witness profiles pass through the node.
struct OspViolation {
    int node_id;
    AgentId agent;
    PreferenceList truthful;
    PreferenceList deviating;
    Profile worst_truthful_profile;
    Profile best_deviating_profile;
    Outcome truthful_outcome;
    Outcome deviating_outcome;
};

struct OspResult {
    bool osp;
    std::optional<OspViolation> witness;
};

// True iff two distinct sibling edges at the node contain p and p2.
bool diverge(const MechanismTree& mech, int node_id, const PreferenceList& p,
             const PreferenceList& p2);

// Every outcome `agent` can receive across profiles that pass through the node
// with the agent's list fixed to `list`, by full subtree traversal.
std::set<Outcome> reachable_outcomes(const MechanismTree& mech, int node_id, const AgentId& agent,
                                     const PreferenceList& list);

// Checks the worst-truthful vs best-deviating inequality at every node whose
// actor is in `for_agents`. Witness is the first violation in preorder node
// order with lists and realizing profiles in canonical order.
OspResult verify_osp(const MechanismTree& mech, const std::vector<AgentId>& for_agents);

// Convenience: OSP for every strategic agent of the mechanism.
OspResult verify_osp(const MechanismTree& mech);

}  // namespace ospmatch
