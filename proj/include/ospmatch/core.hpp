#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ospmatch {

enum class Side { Man, Woman };

inline Side opposite(Side s) { return s == Side::Man ? Side::Woman : Side::Man; }

// Thrown when an enumeration would exceed its configured size limit.
// Distinct from invalid_argument so callers can tell "too big" from "malformed".
struct GuardExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AgentId {
    Side side;
    std::string name;

    friend bool operator==(const AgentId&, const AgentId&) = default;
    // Canonical order: by name, then side. Fixes iteration order everywhere.
    friend auto operator<=>(const AgentId& a, const AgentId& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.side <=> b.side;
    }
};

inline AgentId man(std::string name) { return {Side::Man, std::move(name)}; }
inline AgentId woman(std::string name) { return {Side::Woman, std::move(name)}; }

// A strict ranking of a subset of the opposite side, most preferred first.
// Agents omitted from the list are unacceptable.
class PreferenceList {
public:
    PreferenceList() = default;
    explicit PreferenceList(std::vector<AgentId> ranked) : ranked_(std::move(ranked)) {
        for (std::size_t i = 0; i < ranked_.size(); ++i)
            for (std::size_t j = i + 1; j < ranked_.size(); ++j)
                if (ranked_[i] == ranked_[j])
                    throw std::invalid_argument("duplicate entry in preference list: " + ranked_[i].name);
        if (!ranked_.empty()) {
            Side s = ranked_.front().side;
            for (const auto& a : ranked_)
                if (a.side != s) throw std::invalid_argument("preference list mixes sides");
        }
    }

    const std::vector<AgentId>& ranked() const { return ranked_; }
    bool empty() const { return ranked_.empty(); }
    std::size_t size() const { return ranked_.size(); }

    bool contains(const AgentId& a) const {
        return std::find(ranked_.begin(), ranked_.end(), a) != ranked_.end();
    }

    std::optional<std::size_t> rank_of(const AgentId& a) const {
        auto it = std::find(ranked_.begin(), ranked_.end(), a);
        if (it == ranked_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - ranked_.begin());
    }

    // Most preferred agent among `candidates`; nullopt if none is listed.
    std::optional<AgentId> top_among(const std::set<AgentId>& candidates) const {
        for (const auto& a : ranked_)
            if (candidates.count(a)) return a;
        return std::nullopt;
    }

    // Relative order restricted to `keep`, preserving ranking.
    PreferenceList restricted_to(const std::set<AgentId>& keep) const {
        std::vector<AgentId> out;
        for (const auto& a : ranked_)
            if (keep.count(a)) out.push_back(a);
        return PreferenceList(std::move(out));
    }

    friend bool operator==(const PreferenceList&, const PreferenceList&) = default;
    friend auto operator<=>(const PreferenceList& a, const PreferenceList& b) {
        return std::lexicographical_compare_three_way(a.ranked_.begin(), a.ranked_.end(),
                                                      b.ranked_.begin(), b.ranked_.end());
    }

private:
    std::vector<AgentId> ranked_;
};

// Strict preference of u over v under `list`: u ranked above v, or u listed while
// v is not. Never holds between two unlisted agents.
bool prefers(const PreferenceList& list, const AgentId& u, const AgentId& v);

// An agent's outcome under a matching: a partner, or unmatched.
using Outcome = std::optional<AgentId>;

// Rank of an outcome under `list`, lower is better. Listed partners rank by
// position, being unmatched ranks just below the last listed partner, and any
// unlisted partner ranks below unmatched (all unlisted partners tie).
std::size_t outcome_rank(const PreferenceList& list, const Outcome& o);

inline bool weakly_prefers_outcome(const PreferenceList& list, const Outcome& a, const Outcome& b) {
    return outcome_rank(list, a) <= outcome_rank(list, b);
}
inline bool strictly_prefers_outcome(const PreferenceList& list, const Outcome& a, const Outcome& b) {
    return outcome_rank(list, a) < outcome_rank(list, b);
}

// Preference lists keyed by agent. Used both for one side of a market and for
// the combined assignment fed to a mechanism whose actors span both sides.
class Profile {
public:
    Profile() = default;
    explicit Profile(std::map<AgentId, PreferenceList> lists) : lists_(std::move(lists)) {}

    const std::map<AgentId, PreferenceList>& lists() const { return lists_; }
    bool contains(const AgentId& a) const { return lists_.count(a) > 0; }

    const PreferenceList& at(const AgentId& a) const {
        auto it = lists_.find(a);
        if (it == lists_.end()) throw std::invalid_argument("profile has no list for " + a.name);
        return it->second;
    }

    void set(const AgentId& a, PreferenceList l) { lists_[a] = std::move(l); }

    // Profile with one agent's list replaced.
    Profile with(const AgentId& a, PreferenceList l) const {
        Profile out = *this;
        out.set(a, std::move(l));
        return out;
    }

    // Union of two profiles over disjoint agent sets.
    static Profile merged(const Profile& a, const Profile& b);

    friend bool operator==(const Profile&, const Profile&) = default;
    friend bool operator<(const Profile& a, const Profile& b) { return a.lists_ < b.lists_; }

private:
    std::map<AgentId, PreferenceList> lists_;
};

// Partial one-to-one map between men and women. Agents not mentioned are unmatched.
class Matching {
public:
    Matching() = default;
    explicit Matching(std::vector<std::pair<AgentId, AgentId>> pairs);

    const std::vector<std::pair<AgentId, AgentId>>& pairs() const { return pairs_; }

    Outcome partner_of(const AgentId& a) const {
        for (const auto& [m, w] : pairs_) {
            if (m == a) return w;
            if (w == a) return m;
        }
        return std::nullopt;
    }

    bool empty() const { return pairs_.empty(); }
    std::size_t size() const { return pairs_.size(); }

    friend bool operator==(const Matching&, const Matching&) = default;
    friend bool operator<(const Matching& a, const Matching& b) { return a.pairs_ < b.pairs_; }

private:
    std::vector<std::pair<AgentId, AgentId>> pairs_;  // sorted by man
};

struct Market {
    std::vector<AgentId> men;    // sorted
    std::vector<AgentId> women;  // sorted
    Profile women_profile;       // lists over men, one per woman
    std::optional<Profile> men_profile;

    static Market make(std::vector<std::string> men_names, std::vector<std::string> women_names,
                       std::map<std::string, std::vector<std::string>> women_prefs,
                       std::optional<std::map<std::string, std::vector<std::string>>> men_prefs = std::nullopt);

    bool is_man(const AgentId& a) const {
        return a.side == Side::Man && std::binary_search(men.begin(), men.end(), a);
    }
    bool is_woman(const AgentId& a) const {
        return a.side == Side::Woman && std::binary_search(women.begin(), women.end(), a);
    }
    const std::vector<AgentId>& side_of(Side s) const { return s == Side::Man ? men : women; }

    void validate() const;
};

// Validates `mu` against the market: pairs are man-woman, no agent appears twice,
// all agents belong to the market. Throws invalid_argument on violation.
void validate_matching(const Matching& mu, const Market& market);

// Validates a one-side profile: total on `side`, every list over the opposite
// side with entries drawn from the market.
void validate_profile(const Profile& p, const Market& market, Side side);

// All preference lists over `opposite`: every total order when full_only, else
// every ordered subset including the empty list. Canonical (lexicographic) order.
std::vector<PreferenceList> enumerate_preference_lists(const std::vector<AgentId>& opposite,
                                                       bool full_only);

}  // namespace ospmatch
