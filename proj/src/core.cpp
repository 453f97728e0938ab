#include "ospmatch/core.hpp"

namespace ospmatch {

bool prefers(const PreferenceList& list, const AgentId& u, const AgentId& v) {
    if (u == v) throw std::invalid_argument("prefers: identical agents");
    if (u.side != v.side) throw std::invalid_argument("prefers: agents from different sides");
    auto ru = list.rank_of(u);
    auto rv = list.rank_of(v);
    if (ru && rv) return *ru < *rv;
    return ru.has_value() && !rv.has_value();
}

std::size_t outcome_rank(const PreferenceList& list, const Outcome& o) {
    if (!o) return list.size();
    auto r = list.rank_of(*o);
    return r ? *r : list.size() + 1;
}

Profile Profile::merged(const Profile& a, const Profile& b) {
    std::map<AgentId, PreferenceList> lists = a.lists();
    for (const auto& [agent, l] : b.lists()) {
        if (lists.count(agent)) throw std::invalid_argument("merged profiles overlap on " + agent.name);
        lists.emplace(agent, l);
    }
    return Profile(std::move(lists));
}

Matching::Matching(std::vector<std::pair<AgentId, AgentId>> pairs) : pairs_(std::move(pairs)) {
    for (auto& [m, w] : pairs_) {
        if (m.side == Side::Woman && w.side == Side::Man) std::swap(m, w);
        if (m.side != Side::Man || w.side != Side::Woman)
            throw std::invalid_argument("matching pair is not man-woman");
    }
    std::sort(pairs_.begin(), pairs_.end());
    for (std::size_t i = 0; i + 1 < pairs_.size(); ++i)
        if (pairs_[i].first == pairs_[i + 1].first)
            throw std::invalid_argument("man matched twice: " + pairs_[i].first.name);
    std::set<AgentId> seen;
    for (const auto& [m, w] : pairs_)
        if (!seen.insert(w).second)
            throw std::invalid_argument("woman matched twice: " + w.name);
}

Market Market::make(std::vector<std::string> men_names, std::vector<std::string> women_names,
                    std::map<std::string, std::vector<std::string>> women_prefs,
                    std::optional<std::map<std::string, std::vector<std::string>>> men_prefs) {
    Market mkt;
    for (auto& n : men_names) mkt.men.push_back(man(std::move(n)));
    for (auto& n : women_names) mkt.women.push_back(woman(std::move(n)));
    std::sort(mkt.men.begin(), mkt.men.end());
    std::sort(mkt.women.begin(), mkt.women.end());

    auto to_profile = [](const std::map<std::string, std::vector<std::string>>& raw, Side owner) {
        std::map<AgentId, PreferenceList> lists;
        for (const auto& [name, entries] : raw) {
            std::vector<AgentId> ranked;
            for (const auto& e : entries) ranked.push_back({opposite(owner), e});
            lists.emplace(AgentId{owner, name}, PreferenceList(std::move(ranked)));
        }
        return Profile(std::move(lists));
    };
    mkt.women_profile = to_profile(women_prefs, Side::Woman);
    if (men_prefs) mkt.men_profile = to_profile(*men_prefs, Side::Man);
    mkt.validate();
    return mkt;
}

void Market::validate() const {
    if (men.empty() || women.empty()) throw std::invalid_argument("market side is empty");
    auto check_unique = [](const std::vector<AgentId>& v, const char* what) {
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] == v[i + 1]) throw std::invalid_argument(std::string("duplicate ") + what + ": " + v[i].name);
    };
    check_unique(men, "man");
    check_unique(women, "woman");
    for (const auto& m : men)
        if (m.side != Side::Man) throw std::invalid_argument("man with wrong side tag");
    for (const auto& w : women)
        if (w.side != Side::Woman) throw std::invalid_argument("woman with wrong side tag");
    validate_profile(women_profile, *this, Side::Woman);
    if (men_profile) validate_profile(*men_profile, *this, Side::Man);
}

void validate_matching(const Matching& mu, const Market& market) {
    for (const auto& [m, w] : mu.pairs()) {
        if (!market.is_man(m)) throw std::invalid_argument("matching mentions unknown man " + m.name);
        if (!market.is_woman(w)) throw std::invalid_argument("matching mentions unknown woman " + w.name);
    }
    // Matching's constructor already rejects duplicated agents.
}

void validate_profile(const Profile& p, const Market& market, Side side) {
    const auto& owners = market.side_of(side);
    for (const auto& a : owners)
        if (!p.contains(a)) throw std::invalid_argument("profile missing list for " + a.name);
    for (const auto& [a, list] : p.lists()) {
        if (a.side != side) throw std::invalid_argument("profile lists agent from wrong side: " + a.name);
        if (!std::binary_search(owners.begin(), owners.end(), a))
            throw std::invalid_argument("profile lists unknown agent " + a.name);
        for (const auto& e : list.ranked()) {
            bool known = side == Side::Woman ? market.is_man(e) : market.is_woman(e);
            if (!known) throw std::invalid_argument("list of " + a.name + " mentions unknown agent " + e.name);
        }
    }
}

namespace {

void extend(const std::vector<AgentId>& pool, std::vector<AgentId>& prefix,
            std::vector<bool>& used, std::size_t target_len, std::vector<PreferenceList>& out) {
    if (prefix.size() == target_len) {
        out.push_back(PreferenceList(prefix));
        return;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        prefix.push_back(pool[i]);
        extend(pool, prefix, used, target_len, out);
        prefix.pop_back();
        used[i] = false;
    }
}

}  // namespace

std::vector<PreferenceList> enumerate_preference_lists(const std::vector<AgentId>& opposite,
                                                       bool full_only) {
    std::vector<AgentId> pool = opposite;
    std::sort(pool.begin(), pool.end());
    std::vector<PreferenceList> out;
    std::vector<AgentId> prefix;
    std::vector<bool> used(pool.size(), false);
    if (full_only) {
        extend(pool, prefix, used, pool.size(), out);
    } else {
        for (std::size_t len = 0; len <= pool.size(); ++len)
            extend(pool, prefix, used, len, out);
        std::sort(out.begin(), out.end());
    }
    return out;
}

}  // namespace ospmatch
