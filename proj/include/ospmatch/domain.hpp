#pragma once

#include <map>
#include <vector>

#include "ospmatch/core.hpp"

namespace ospmatch {

// Per-agent finite set of admissible preference lists. Lists are kept sorted
// and deduplicated, so equal products compare equal.
class DomainProduct {
public:
    DomainProduct() = default;
    explicit DomainProduct(std::map<AgentId, std::vector<PreferenceList>> sets);

    const std::map<AgentId, std::vector<PreferenceList>>& sets() const { return sets_; }
    bool contains_agent(const AgentId& a) const { return sets_.count(a) > 0; }

    const std::vector<PreferenceList>& at(const AgentId& a) const {
        auto it = sets_.find(a);
        if (it == sets_.end()) throw std::invalid_argument("domain has no set for " + a.name);
        return it->second;
    }

    std::vector<AgentId> agents() const {
        std::vector<AgentId> out;
        for (const auto& [a, _] : sets_) out.push_back(a);
        return out;
    }

    // Product of all set sizes. Saturates at SIZE_MAX.
    std::size_t profile_count() const;

    // True when `p` assigns every agent a list from its set.
    bool contains_profile(const Profile& p) const;

    // Pointwise subset test.
    bool subset_of(const DomainProduct& other) const;

    DomainProduct with(const AgentId& a, std::vector<PreferenceList> lists) const;

    // Every profile of the product, odometer order over the sorted sets.
    // Guarded by profile_count() <= guard.
    std::vector<Profile> enumerate_profiles(std::size_t guard = 2'000'000) const;

    // The full-list (all permutations) domain for each agent of `side`.
    static DomainProduct full_lists(const Market& market, Side side);
    // Every ordered subset for each agent of `side`.
    static DomainProduct all_lists(const Market& market, Side side);

    friend bool operator==(const DomainProduct&, const DomainProduct&) = default;

private:
    std::map<AgentId, std::vector<PreferenceList>> sets_;
};

}  // namespace ospmatch
