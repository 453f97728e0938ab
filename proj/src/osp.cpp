#include "ospmatch/osp.hpp"

#include <functional>
#include <map>

namespace ospmatch {

namespace {

struct ReachedLeaf {
    Outcome outcome;
    Profile profile;  // canonical profile passing root -> leaf
};

// All leaves reachable from `start` when `agent` plays `list`, with a canonical
// witness profile per leaf. Other agents range over everything consistent with
// the root path; sibling order makes the result deterministic.
std::vector<ReachedLeaf> reach(const MechanismTree& mech, int start, const AgentId& agent,
                               const PreferenceList& list) {
    std::map<AgentId, Predicate> constraint;
    for (const auto& [a, _] : mech.domains.sets()) constraint[a] = mech.residual_at(start, a);

    std::vector<ReachedLeaf> out;
    std::function<void(int)> walk = [&](int idx) {
        const auto& n = mech.node(idx);
        if (n.leaf) {
            std::map<AgentId, PreferenceList> lists;
            for (const auto& [a, pred] : constraint)
                lists.emplace(a, a == agent ? list : pred.lists().front());
            out.push_back({n.leaf->partner_of(agent), Profile(std::move(lists))});
            return;
        }
        const AgentId& actor = *n.actor;
        if (actor == agent) {
            for (int c : n.children)
                if (mech.node(c).in_predicate.contains(list)) {
                    walk(c);
                    return;
                }
            return;  // list inconsistent with this branch
        }
        for (int c : n.children) {
            Predicate saved = constraint[actor];
            constraint[actor] = mech.node(c).in_predicate;
            walk(c);
            constraint[actor] = std::move(saved);
        }
    };
    walk(start);
    return out;
}

}  // namespace

bool diverge(const MechanismTree& mech, int node_id, const PreferenceList& p,
             const PreferenceList& p2) {
    int idx = mech.index_of_id(node_id);
    if (mech.is_leaf(idx)) throw std::invalid_argument("diverge: node is a leaf");
    int edge_p = -1, edge_p2 = -1;
    const auto& children = mech.node(idx).children;
    for (std::size_t i = 0; i < children.size(); ++i) {
        const Predicate& pred = mech.node(children[i]).in_predicate;
        if (pred.contains(p)) edge_p = static_cast<int>(i);
        if (pred.contains(p2)) edge_p2 = static_cast<int>(i);
    }
    return edge_p != -1 && edge_p2 != -1 && edge_p != edge_p2;
}

std::set<Outcome> reachable_outcomes(const MechanismTree& mech, int node_id, const AgentId& agent,
                                     const PreferenceList& list) {
    int idx = mech.index_of_id(node_id);
    if (!mech.is_leaf(idx) && mech.node(idx).actor == agent) {
        bool matched = false;
        for (int c : mech.node(idx).children)
            if (mech.node(c).in_predicate.contains(list)) matched = true;
        if (!matched) throw std::invalid_argument("list matches no edge at node " + std::to_string(node_id));
    }
    std::set<Outcome> out;
    for (const auto& leaf : reach(mech, idx, agent, list)) out.insert(leaf.outcome);
    return out;
}

OspResult verify_osp(const MechanismTree& mech, const std::vector<AgentId>& for_agents) {
    std::vector<int> preorder;
    std::function<void(int)> visit = [&](int idx) {
        preorder.push_back(idx);
        for (int c : mech.node(idx).children) visit(c);
    };
    if (mech.root != -1) visit(mech.root);

    auto watched = [&](const AgentId& a) {
        return std::find(for_agents.begin(), for_agents.end(), a) != for_agents.end();
    };

    for (int idx : preorder) {
        const auto& n = mech.node(idx);
        if (n.leaf || !watched(*n.actor)) continue;
        const AgentId& agent = *n.actor;

        // Residual lists at this node, with the edge each belongs to.
        std::vector<std::pair<PreferenceList, int>> lists;
        for (std::size_t e = 0; e < n.children.size(); ++e)
            for (const auto& l : mech.node(n.children[e]).in_predicate.lists())
                lists.emplace_back(l, static_cast<int>(e));
        std::sort(lists.begin(), lists.end());

        std::map<PreferenceList, std::vector<ReachedLeaf>> reached;
        for (const auto& [l, _] : lists) reached.emplace(l, reach(mech, idx, agent, l));

        for (const auto& [p, edge_p] : lists) {
            const auto& truthful_leaves = reached.at(p);
            // Worst truthful outcome under p; earliest realization wins ties.
            const ReachedLeaf* worst = nullptr;
            for (const auto& leaf : truthful_leaves)
                if (!worst || outcome_rank(p, leaf.outcome) > outcome_rank(p, worst->outcome))
                    worst = &leaf;
            if (!worst) continue;

            for (const auto& [p2, edge_p2] : lists) {
                if (edge_p2 == edge_p) continue;
                const ReachedLeaf* best = nullptr;
                for (const auto& leaf : reached.at(p2))
                    if (!best || outcome_rank(p, leaf.outcome) < outcome_rank(p, best->outcome))
                        best = &leaf;
                if (!best) continue;
                if (outcome_rank(p, worst->outcome) > outcome_rank(p, best->outcome)) {
                    OspViolation v{n.id,          agent,          p,
                                   p2,            worst->profile, best->profile,
                                   worst->outcome, best->outcome};
                    return {false, std::move(v)};
                }
            }
        }
    }
    return {true, std::nullopt};
}

OspResult verify_osp(const MechanismTree& mech) {
    return verify_osp(mech, mech.domains.agents());
}

}  // namespace ospmatch
