#pragma once

#include <string>
#include <vector>

#include "ospmatch/core.hpp"
#include "ospmatch/domain.hpp"

namespace ospmatch {

// Extensional edge predicate: an explicit set of preference lists, kept sorted.
class Predicate {
public:
    Predicate() = default;
    explicit Predicate(std::vector<PreferenceList> lists) : lists_(std::move(lists)) {
        std::sort(lists_.begin(), lists_.end());
        lists_.erase(std::unique(lists_.begin(), lists_.end()), lists_.end());
    }

    const std::vector<PreferenceList>& lists() const { return lists_; }
    bool empty() const { return lists_.empty(); }
    std::size_t size() const { return lists_.size(); }

    bool contains(const PreferenceList& l) const {
        return std::binary_search(lists_.begin(), lists_.end(), l);
    }

    bool disjoint_with(const Predicate& other) const;
    Predicate intersect(const Predicate& other) const;
    Predicate unite(const Predicate& other) const;
    Predicate subtract(const Predicate& other) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;

private:
    std::vector<PreferenceList> lists_;
};

// An extensive-form query mechanism: internal nodes ask one agent, edges carry
// disjoint predicates covering the agent's residual domain, leaves carry
// matchings. Which side(s) the actors come from is not fixed, so the same
// structure serves one-side-querying and two-sides-querying mechanisms.
struct MechanismTree {
    struct Node {
        int id = 0;                     // user-facing id, unique
        std::optional<AgentId> actor;   // set for internal nodes
        std::optional<Matching> leaf;   // set for leaves
        int parent = -1;                // index into nodes, -1 for the root
        Predicate in_predicate;         // predicate of the edge from the parent
        std::vector<int> children;      // indices, sibling order = edge order
    };

    std::vector<AgentId> men;    // sorted
    std::vector<AgentId> women;  // sorted
    DomainProduct domains;       // one set per strategic agent
    std::vector<Node> nodes;
    int root = -1;

    const Node& node(int idx) const { return nodes.at(static_cast<std::size_t>(idx)); }
    bool is_leaf(int idx) const { return node(idx).leaf.has_value(); }

    int index_of_id(int id) const;

    // Lists of `agent` consistent with the path from the root to `idx`:
    // the predicate of the last edge out of an agent-node on that path, or the
    // agent's whole domain set if it has not acted yet.
    Predicate residual_at(int idx, const AgentId& agent) const;

    // Structural assembly from parsed parts. Throws on duplicate ids, missing
    // root, cycles, orphan nodes, or edges out of leaves.
    static MechanismTree assemble(std::vector<AgentId> men, std::vector<AgentId> women,
                                  DomainProduct domains,
                                  std::vector<std::pair<int, std::optional<AgentId>>> internal_or_leaf_ids,
                                  std::vector<std::pair<int, Matching>> leaf_matchings,
                                  std::vector<std::tuple<int, int, Predicate>> edges);

    friend bool operator==(const MechanismTree&, const MechanismTree&);
};

bool operator==(const MechanismTree::Node&, const MechanismTree::Node&);

struct MechViolation {
    int node_id;
    std::string message;
};

struct MechValidation {
    bool valid;
    std::vector<MechViolation> violations;
};

struct PassTrace {
    Profile profile;
    std::vector<int> path;  // node ids, root to leaf
};

// Checks the definition clauses at every node: nonempty predicates over the
// actor's lists, pairwise disjoint siblings, sibling union equal to the actor's
// residual, and a valid matching at every leaf.
MechValidation validate(const MechanismTree& mech);

// Follows the unique matching edge at every internal node. Throws
// invalid_argument when no edge matches (profile outside the domains).
std::pair<Matching, PassTrace> evaluate(const MechanismTree& mech, const Profile& profile);

// Intersects every edge predicate with the acting agent's restricted set,
// drops emptied edges with their subtrees, and splices out single-child nodes.
// Agents absent from `restricted` keep their full sets.
MechanismTree prune(const MechanismTree& mech, const DomainProduct& restricted);

// Deterministic Graphviz rendering. One-way; JSON is the round-trip format.
std::string export_dot(const MechanismTree& mech);

}  // namespace ospmatch
