#include "ospmatch/mechanism.hpp"

#include <functional>
#include <map>
#include <sstream>

namespace ospmatch {

bool Predicate::disjoint_with(const Predicate& other) const {
    for (const auto& l : lists_)
        if (other.contains(l)) return false;
    return true;
}

Predicate Predicate::intersect(const Predicate& other) const {
    std::vector<PreferenceList> out;
    for (const auto& l : lists_)
        if (other.contains(l)) out.push_back(l);
    return Predicate(std::move(out));
}

Predicate Predicate::unite(const Predicate& other) const {
    std::vector<PreferenceList> out = lists_;
    out.insert(out.end(), other.lists_.begin(), other.lists_.end());
    return Predicate(std::move(out));
}

Predicate Predicate::subtract(const Predicate& other) const {
    std::vector<PreferenceList> out;
    for (const auto& l : lists_)
        if (!other.contains(l)) out.push_back(l);
    return Predicate(std::move(out));
}

int MechanismTree::index_of_id(int id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    throw std::invalid_argument("no node with id " + std::to_string(id));
}

Predicate MechanismTree::residual_at(int idx, const AgentId& agent) const {
    int cur = idx;
    while (node(cur).parent != -1) {
        int p = node(cur).parent;
        if (node(p).actor == agent) return node(cur).in_predicate;
        cur = p;
    }
    return Predicate(domains.at(agent));
}

bool operator==(const MechanismTree::Node& a, const MechanismTree::Node& b) {
    return a.id == b.id && a.actor == b.actor && a.leaf == b.leaf && a.parent == b.parent &&
           a.in_predicate == b.in_predicate && a.children == b.children;
}

bool operator==(const MechanismTree& a, const MechanismTree& b) {
    return a.men == b.men && a.women == b.women && a.domains == b.domains && a.root == b.root &&
           a.nodes == b.nodes;
}

MechanismTree MechanismTree::assemble(std::vector<AgentId> men, std::vector<AgentId> women,
                                      DomainProduct domains,
                                      std::vector<std::pair<int, std::optional<AgentId>>> internal_or_leaf_ids,
                                      std::vector<std::pair<int, Matching>> leaf_matchings,
                                      std::vector<std::tuple<int, int, Predicate>> edges) {
    MechanismTree t;
    std::sort(men.begin(), men.end());
    std::sort(women.begin(), women.end());
    t.men = std::move(men);
    t.women = std::move(women);
    t.domains = std::move(domains);

    std::map<int, int> index_of;
    for (const auto& [id, actor] : internal_or_leaf_ids) {
        if (index_of.count(id)) throw std::invalid_argument("duplicate node id " + std::to_string(id));
        index_of[id] = static_cast<int>(t.nodes.size());
        Node n;
        n.id = id;
        n.actor = actor;
        t.nodes.push_back(std::move(n));
    }
    for (auto& [id, mu] : leaf_matchings) {
        auto it = index_of.find(id);
        if (it == index_of.end()) throw std::invalid_argument("leaf id unknown: " + std::to_string(id));
        if (t.nodes[it->second].actor)
            throw std::invalid_argument("node is both internal and leaf: " + std::to_string(id));
        t.nodes[it->second].leaf = std::move(mu);
    }
    for (auto& [from, to, pred] : edges) {
        auto fi = index_of.find(from), ti = index_of.find(to);
        if (fi == index_of.end() || ti == index_of.end())
            throw std::invalid_argument("edge references unknown node");
        Node& f = t.nodes[fi->second];
        Node& c = t.nodes[ti->second];
        if (f.leaf) throw std::invalid_argument("edge out of a leaf node " + std::to_string(from));
        if (c.parent != -1) throw std::invalid_argument("node has two parents: " + std::to_string(to));
        c.parent = fi->second;
        c.in_predicate = std::move(pred);
        f.children.push_back(ti->second);
    }

    int root = -1;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        if (t.nodes[i].parent == -1) {
            if (root != -1) throw std::invalid_argument("orphan node or multiple roots");
            root = static_cast<int>(i);
        }
        if (!t.nodes[i].actor && !t.nodes[i].leaf)
            throw std::invalid_argument("node " + std::to_string(t.nodes[i].id) +
                                        " is neither internal (actor) nor leaf (matching)");
    }
    if (root == -1) throw std::invalid_argument(t.nodes.empty() ? "mechanism has no nodes"
                                                                : "cyclic graph: no root");
    t.root = root;

    // Reachability from the root proves there is no cycle among the rest.
    std::vector<bool> seen(t.nodes.size(), false);
    std::vector<int> stack{root};
    std::size_t count = 0;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (seen[i]) throw std::invalid_argument("cyclic graph");
        seen[i] = true;
        ++count;
        for (int c : t.nodes[i].children) stack.push_back(c);
    }
    if (count != t.nodes.size()) throw std::invalid_argument("orphan nodes unreachable from root");
    return t;
}

MechValidation validate(const MechanismTree& mech) {
    std::vector<MechViolation> out;
    auto flag = [&](int idx, std::string msg) {
        out.push_back({mech.node(idx).id, std::move(msg)});
    };

    for (std::size_t i = 0; i < mech.nodes.size(); ++i) {
        const auto& n = mech.nodes[i];
        int idx = static_cast<int>(i);

        if (n.leaf) {
            if (!n.children.empty()) flag(idx, "leaf has outgoing edges");
            try {
                Market probe{mech.men, mech.women, Profile{}, std::nullopt};
                for (const auto& [m, w] : n.leaf->pairs()) {
                    if (!probe.is_man(m)) throw std::invalid_argument("unknown man " + m.name);
                    if (!probe.is_woman(w)) throw std::invalid_argument("unknown woman " + w.name);
                }
            } catch (const std::invalid_argument& e) {
                flag(idx, std::string("invalid leaf matching: ") + e.what());
            }
            continue;
        }

        const AgentId& actor = *n.actor;
        if (!mech.domains.contains_agent(actor)) {
            flag(idx, "actor " + actor.name + " has no domain set");
            continue;
        }
        if (n.children.empty()) flag(idx, "internal node has no outgoing edges");

        for (int c : n.children) {
            const Predicate& pred = mech.node(c).in_predicate;
            if (pred.empty()) flag(idx, "edge with empty predicate");
            for (const auto& l : pred.lists())
                for (const auto& e : l.ranked())
                    if (e.side != opposite(actor.side))
                        flag(idx, "edge predicate list is not over the side opposite to " + actor.name);
        }
        for (std::size_t a = 0; a < n.children.size(); ++a)
            for (std::size_t b = a + 1; b < n.children.size(); ++b)
                if (!mech.node(n.children[a]).in_predicate.disjoint_with(mech.node(n.children[b]).in_predicate))
                    flag(idx, "sibling predicates overlap");

        Predicate expected = mech.residual_at(idx, actor);
        Predicate got;
        for (int c : n.children) got = got.unite(mech.node(c).in_predicate);
        if (!(got == expected))
            flag(idx, "sibling predicates do not cover the residual domain of " + actor.name);
    }
    return {out.empty(), std::move(out)};
}

std::pair<Matching, PassTrace> evaluate(const MechanismTree& mech, const Profile& profile) {
    PassTrace trace;
    trace.profile = profile;
    int cur = mech.root;
    while (true) {
        trace.path.push_back(mech.node(cur).id);
        if (mech.is_leaf(cur)) return {*mech.node(cur).leaf, std::move(trace)};
        const AgentId& actor = *mech.node(cur).actor;
        const PreferenceList& list = profile.at(actor);
        int next = -1;
        for (int c : mech.node(cur).children)
            if (mech.node(c).in_predicate.contains(list)) {
                next = c;
                break;
            }
        if (next == -1)
            throw std::invalid_argument("no edge matches the list of " + actor.name +
                                        " at node " + std::to_string(mech.node(cur).id) +
                                        " (profile outside the mechanism's domains)");
        cur = next;
    }
}

MechanismTree prune(const MechanismTree& mech, const DomainProduct& restricted) {
    if (!restricted.subset_of(mech.domains))
        throw std::invalid_argument("restricted domains are not a pointwise subset");

    std::map<AgentId, std::vector<PreferenceList>> merged;
    for (const auto& [agent, lists] : mech.domains.sets())
        merged[agent] = restricted.contains_agent(agent) ? restricted.at(agent) : lists;
    DomainProduct new_domains{merged};

    MechanismTree out;
    out.men = mech.men;
    out.women = mech.women;
    out.domains = new_domains;

    auto restriction_of = [&](const AgentId& a) { return Predicate(new_domains.at(a)); };

    // Returns the new index of the subtree copied from `old_idx`, following the
    // single surviving edge through collapsed nodes.
    std::function<int(int)> build = [&](int old_idx) -> int {
        const auto& n = mech.node(old_idx);
        if (n.leaf) {
            MechanismTree::Node leaf;
            leaf.id = static_cast<int>(out.nodes.size());
            leaf.leaf = n.leaf;
            out.nodes.push_back(std::move(leaf));
            return leaf.id;
        }
        std::vector<std::pair<Predicate, int>> kept;
        Predicate r = restriction_of(*n.actor);
        for (int c : n.children) {
            Predicate p = mech.node(c).in_predicate.intersect(r);
            if (!p.empty()) kept.emplace_back(std::move(p), c);
        }
        if (kept.empty())
            throw std::invalid_argument("pruning removed every edge at node " +
                                        std::to_string(n.id) + "; mechanism invalid over the restriction");
        if (kept.size() == 1) return build(kept.front().second);

        int idx = static_cast<int>(out.nodes.size());
        MechanismTree::Node inner;
        inner.id = idx;
        inner.actor = n.actor;
        out.nodes.push_back(std::move(inner));
        for (auto& [pred, old_child] : kept) {
            int child = build(old_child);
            out.nodes[child].parent = idx;
            out.nodes[child].in_predicate = std::move(pred);
            out.nodes[idx].children.push_back(child);
        }
        return idx;
    };

    out.root = build(mech.root);
    return out;
}

namespace {

std::string list_label(const PreferenceList& l) {
    if (l.empty()) return "()";
    std::string s;
    for (const auto& a : l.ranked()) {
        if (!s.empty()) s += ">";
        s += a.name;
    }
    return s;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string export_dot(const MechanismTree& mech) {
    std::ostringstream os;
    os << "digraph mechanism {\n";
    os << "  node [fontname=\"monospace\"];\n";

    // Emit in preorder so output is stable regardless of storage order.
    std::vector<int> order;
    std::function<void(int)> visit = [&](int idx) {
        order.push_back(idx);
        for (int c : mech.node(idx).children) visit(c);
    };
    visit(mech.root);

    for (int idx : order) {
        const auto& n = mech.node(idx);
        if (n.leaf) {
            std::string label;
            for (const auto& [m, w] : n.leaf->pairs()) {
                if (!label.empty()) label += "\\n";
                label += m.name + "-" + w.name;
            }
            if (label.empty()) label = "(empty)";
            os << "  n" << n.id << " [shape=box, label=\"" << escape(label) << "\"];\n";
        } else {
            os << "  n" << n.id << " [shape=circle, label=\"" << escape(n.actor->name) << "\"];\n";
        }
    }
    for (int idx : order) {
        const auto& n = mech.node(idx);
        for (int c : n.children) {
            std::string label;
            for (const auto& l : mech.node(c).in_predicate.lists()) {
                if (!label.empty()) label += "\\n";
                label += list_label(l);
            }
            os << "  n" << n.id << " -> n" << mech.node(c).id << " [label=\"" << escape(label)
               << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace ospmatch
