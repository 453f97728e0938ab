#include "ospmatch/two_sided.hpp"

#include <functional>

namespace ospmatch {

namespace {

// Copies `sub` into `out` below (parent, via), remapping node indices.
int graft(MechanismTree& out, const MechanismTree& sub, int sub_idx, int parent, Predicate via) {
    const auto& n = sub.node(sub_idx);
    MechanismTree::Node copy;
    copy.id = static_cast<int>(out.nodes.size());
    copy.actor = n.actor;
    copy.leaf = n.leaf;
    copy.parent = parent;
    copy.in_predicate = std::move(via);
    int idx = copy.id;
    out.nodes.push_back(std::move(copy));
    if (parent == -1)
        out.root = idx;
    else
        out.nodes[parent].children.push_back(idx);
    for (int c : n.children) graft(out, sub, c, idx, sub.node(c).in_predicate);
    return idx;
}

}  // namespace

MechanismTree lift(const std::function<MechanismTree(const Profile&)>& builder,
                   const Market& market, const DomainProduct& women_domain) {
    for (const auto& w : market.women)
        if (!women_domain.contains_agent(w))
            throw std::invalid_argument("women's domain is missing " + w.name);

    MechanismTree out;
    out.men = market.men;
    out.women = market.women;

    std::optional<DomainProduct> men_domain;
    std::map<AgentId, std::vector<PreferenceList>> combined = women_domain.sets();

    std::function<void(std::size_t, Profile, int, Predicate)> ask =
        [&](std::size_t i, Profile q, int parent, Predicate via) {
            if (i == market.women.size()) {
                MechanismTree sub;
                try {
                    sub = builder(q);
                } catch (const std::exception& e) {
                    throw std::invalid_argument(
                        std::string("lift builder is partial over the women's domain: ") + e.what());
                }
                if (!men_domain) {
                    men_domain = sub.domains;
                    for (const auto& [agent, lists] : sub.domains.sets()) combined[agent] = lists;
                } else if (!(sub.domains == *men_domain)) {
                    throw std::invalid_argument(
                        "lift builder returned mechanisms with differing men's domains");
                }
                graft(out, sub, sub.root, parent, std::move(via));
                return;
            }
            const AgentId& w = market.women[i];
            int node;
            {
                MechanismTree::Node n;
                n.id = static_cast<int>(out.nodes.size());
                n.actor = w;
                n.parent = parent;
                n.in_predicate = std::move(via);
                node = n.id;
                out.nodes.push_back(std::move(n));
                if (parent == -1)
                    out.root = node;
                else
                    out.nodes[parent].children.push_back(node);
            }
            for (const auto& l : women_domain.at(w))
                ask(i + 1, q.with(w, l), node, Predicate{{l}});
        };

    ask(0, Profile{}, -1, Predicate{});
    out.domains = DomainProduct(std::move(combined));
    return out;
}

MechanismTree lift(const std::function<MechanismTree(const Profile&)>& builder,
                   const Market& market) {
    return lift(builder, market, DomainProduct::full_lists(market, Side::Woman));
}

TwoSidedStabilityResult verify_two_sided_stability(const MechanismTree& mech, const Market& market,
                                                   std::size_t guard) {
    for (const auto& m : market.men)
        if (!mech.domains.contains_agent(m))
            throw std::invalid_argument("stability check needs a domain for every man; missing " +
                                        m.name);
    for (const auto& w : market.women)
        if (!mech.domains.contains_agent(w))
            throw std::invalid_argument("stability check needs a domain for every woman; missing " +
                                        w.name);

    for (const auto& r : mech.domains.enumerate_profiles(guard)) {
        Profile men_part, women_part;
        for (const auto& [agent, list] : r.lists())
            (agent.side == Side::Man ? men_part : women_part).set(agent, list);
        Matching mu = evaluate(mech, r).first;
        auto res = is_stable(mu, men_part, women_part, market);
        if (!res.stable)
            return {false, TwoSidedStabilityWitness{std::move(men_part), std::move(women_part),
                                                    std::move(res.witnesses)}};
    }
    return {true, std::nullopt};
}

}  // namespace ospmatch
