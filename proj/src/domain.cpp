#include "ospmatch/domain.hpp"

#include <limits>

namespace ospmatch {

DomainProduct::DomainProduct(std::map<AgentId, std::vector<PreferenceList>> sets)
    : sets_(std::move(sets)) {
    for (auto& [agent, lists] : sets_) {
        if (lists.empty()) throw std::invalid_argument("empty domain set for " + agent.name);
        std::sort(lists.begin(), lists.end());
        lists.erase(std::unique(lists.begin(), lists.end()), lists.end());
        for (const auto& l : lists)
            for (const auto& e : l.ranked())
                if (e.side != opposite(agent.side))
                    throw std::invalid_argument("domain list for " + agent.name + " is not over the opposite side");
    }
}

std::size_t DomainProduct::profile_count() const {
    std::size_t n = 1;
    for (const auto& [_, lists] : sets_) {
        if (n > std::numeric_limits<std::size_t>::max() / lists.size())
            return std::numeric_limits<std::size_t>::max();
        n *= lists.size();
    }
    return n;
}

bool DomainProduct::contains_profile(const Profile& p) const {
    for (const auto& [agent, lists] : sets_) {
        if (!p.contains(agent)) return false;
        if (!std::binary_search(lists.begin(), lists.end(), p.at(agent))) return false;
    }
    return true;
}

bool DomainProduct::subset_of(const DomainProduct& other) const {
    for (const auto& [agent, lists] : sets_) {
        if (!other.contains_agent(agent)) return false;
        const auto& big = other.at(agent);
        for (const auto& l : lists)
            if (!std::binary_search(big.begin(), big.end(), l)) return false;
    }
    return true;
}

DomainProduct DomainProduct::with(const AgentId& a, std::vector<PreferenceList> lists) const {
    auto sets = sets_;
    sets[a] = std::move(lists);
    return DomainProduct(std::move(sets));
}

std::vector<Profile> DomainProduct::enumerate_profiles(std::size_t guard) const {
    if (profile_count() > guard) throw GuardExceeded("domain product too large to enumerate");
    std::vector<Profile> out;
    std::vector<std::pair<AgentId, const std::vector<PreferenceList>*>> axes;
    for (const auto& [agent, lists] : sets_) axes.emplace_back(agent, &lists);
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::map<AgentId, PreferenceList> lists;
        for (std::size_t i = 0; i < axes.size(); ++i)
            lists.emplace(axes[i].first, (*axes[i].second)[idx[i]]);
        out.push_back(Profile(std::move(lists)));
        std::size_t i = axes.size();
        while (i > 0) {
            --i;
            if (++idx[i] < axes[i].second->size()) break;
            idx[i] = 0;
            if (i == 0) return out;
        }
        if (axes.empty()) return out;
    }
}

DomainProduct DomainProduct::full_lists(const Market& market, Side side) {
    std::map<AgentId, std::vector<PreferenceList>> sets;
    auto lists = enumerate_preference_lists(market.side_of(opposite(side)), true);
    for (const auto& a : market.side_of(side)) sets[a] = lists;
    return DomainProduct(std::move(sets));
}

DomainProduct DomainProduct::all_lists(const Market& market, Side side) {
    std::map<AgentId, std::vector<PreferenceList>> sets;
    auto lists = enumerate_preference_lists(market.side_of(opposite(side)), false);
    for (const auto& a : market.side_of(side)) sets[a] = lists;
    return DomainProduct(std::move(sets));
}

}  // namespace ospmatch
