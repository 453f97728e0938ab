#include "ospmatch/experiments.hpp"

#include <algorithm>
#include <numeric>

#include "ospmatch/rng.hpp"

namespace ospmatch {

// ---------------------------------------------------------------------------
// Rotation pattern detection
// ---------------------------------------------------------------------------

namespace {

// ranks[w][m]: position of man m on woman w's list, -1 if unlisted.
using RankMatrix = std::vector<std::vector<int>>;

RankMatrix rank_matrix(const Profile& q, const Market& market) {
    RankMatrix ranks(market.women.size(), std::vector<int>(market.men.size(), -1));
    for (std::size_t w = 0; w < market.women.size(); ++w) {
        const auto& list = q.at(market.women[w]).ranked();
        for (std::size_t r = 0; r < list.size(); ++r) {
            auto it = std::lower_bound(market.men.begin(), market.men.end(), list[r]);
            if (it != market.men.end() && *it == list[r])
                ranks[w][it - market.men.begin()] = static_cast<int>(r);
        }
    }
    return ranks;
}

inline bool in_order(const std::vector<int>& row, int a, int b, int c) {
    int ra = row[a], rb = row[b], rc = row[c];
    return ra >= 0 && rb >= 0 && rc >= 0 && ra < rb && rb < rc;
}

// Visits rotation witnesses in canonical order. Each rotation class is
// reported once, led by its lexicographically least woman, so y and z range
// strictly above x. Returns true as soon as `visit` does.
template <typename Visit>
bool scan_rotations(const RankMatrix& ranks, std::size_t n_men, std::size_t n_women,
                    Visit&& visit) {
    for (std::size_t x = 0; x < n_women; ++x)
        for (std::size_t y = x + 1; y < n_women; ++y)
            for (std::size_t z = x + 1; z < n_women; ++z) {
                if (z == y) continue;
                for (std::size_t a = 0; a < n_men; ++a)
                    for (std::size_t b = 0; b < n_men; ++b) {
                        if (b == a || ranks[x][a] < 0 || ranks[x][b] < 0 ||
                            ranks[x][a] >= ranks[x][b])
                            continue;
                        for (std::size_t c = 0; c < n_men; ++c) {
                            if (c == a || c == b) continue;
                            if (!in_order(ranks[x], static_cast<int>(a), static_cast<int>(b),
                                          static_cast<int>(c)))
                                continue;
                            if (!in_order(ranks[y], static_cast<int>(b), static_cast<int>(c),
                                          static_cast<int>(a)))
                                continue;
                            if (!in_order(ranks[z], static_cast<int>(c), static_cast<int>(a),
                                          static_cast<int>(b)))
                                continue;
                            if (visit(a, b, c, x, y, z)) return true;
                        }
                    }
            }
    return false;
}

}  // namespace

std::vector<PatternWitness> tricyclical_triples(const Profile& q, const Market& market) {
    validate_profile(q, market, Side::Woman);
    RankMatrix ranks = rank_matrix(q, market);
    std::vector<PatternWitness> out;
    scan_rotations(ranks, market.men.size(), market.women.size(),
                   [&](std::size_t a, std::size_t b, std::size_t c, std::size_t x, std::size_t y,
                       std::size_t z) {
                       out.push_back(PatternWitness{
                           {market.men[a], market.men[b], market.men[c]},
                           {market.women[x], market.women[y], market.women[z]}});
                       return false;
                   });
    return out;
}

bool has_tricyclical_triple(const Profile& q, const Market& market) {
    RankMatrix ranks = rank_matrix(q, market);
    return scan_rotations(ranks, market.men.size(), market.women.size(),
                          [](auto...) { return true; });
}

// ---------------------------------------------------------------------------
// Sampled and exhaustive pattern frequency
// ---------------------------------------------------------------------------

namespace {

// One sampled trial: draw a full-list profile as a rank matrix and scan it.
bool trial_hits(std::size_t n_men, std::size_t n_women, std::uint64_t seed, std::uint64_t trial) {
    SplitMix64 rng = trial_rng(seed, trial);
    RankMatrix ranks(n_women, std::vector<int>(n_men));
    std::vector<int> perm(n_men);
    for (std::size_t w = 0; w < n_women; ++w) {
        std::iota(perm.begin(), perm.end(), 0);
        shuffle_deterministic(perm, rng);
        for (std::size_t r = 0; r < n_men; ++r) ranks[w][perm[r]] = static_cast<int>(r);
    }
    return scan_rotations(ranks, n_men, n_women, [](auto...) { return true; });
}

PatternReport sample_serial(std::size_t n_men, std::size_t n_women, std::size_t trials,
                            std::uint64_t seed) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t)
        if (trial_hits(n_men, n_women, seed, t)) ++hits;
    return {n_men, n_women, trials, hits, double(hits) / double(trials), seed, false, {}};
}

PatternReport sample_parallel(std::size_t n_men, std::size_t n_women, std::size_t trials,
                              std::uint64_t seed) {
    long long hits = 0;
    const long long n = static_cast<long long>(trials);
#pragma omp parallel for schedule(static) reduction(+ : hits)
    for (long long t = 0; t < n; ++t)
        if (trial_hits(n_men, n_women, seed, static_cast<std::uint64_t>(t))) ++hits;
    return {n_men,          n_women, trials, static_cast<std::size_t>(hits),
            double(hits) / double(trials), seed,    false,  {}};
}

std::vector<std::vector<int>> lex_permutations(std::size_t n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

Market letters_market(std::size_t n_men, std::size_t n_women) {
    // Men a, b, c, ...; women x, y, z, w, v, ... — enough for desk-scale use.
    static const char* kMen[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
    static const char* kWomen[] = {"x", "y", "z", "u", "v", "w", "s", "t"};
    if (n_men > 8 || n_women > 8) throw GuardExceeded("letter markets are capped at 8x8");
    std::vector<std::string> men(kMen, kMen + n_men);
    std::vector<std::string> women(kWomen, kWomen + n_women);
    std::map<std::string, std::vector<std::string>> prefs;
    for (const auto& w : women) prefs[w] = men;  // placeholder full lists
    return Market::make(men, women, prefs);
}

}  // namespace

PatternReport sample_pattern_frequency(std::size_t n_men, std::size_t n_women, std::size_t trials,
                                       std::uint64_t seed, bool parallel) {
    if (trials == 0) throw std::invalid_argument("at least one trial required");
    if (n_men < 1 || n_women < 1) throw std::invalid_argument("market sides must be nonempty");
    return parallel ? sample_parallel(n_men, n_women, trials, seed)
                    : sample_serial(n_men, n_women, trials, seed);
}

PatternReport exhaustive_pattern_frequency(std::size_t n_men, std::size_t n_women, bool parallel,
                                           std::size_t guard) {
    Market market = letters_market(n_men, n_women);
    auto perms = lex_permutations(n_men);
    std::size_t total = 1;
    for (std::size_t w = 0; w < n_women; ++w) {
        if (total > guard / perms.size()) throw GuardExceeded("exhaustive profile space too large");
        total *= perms.size();
    }

    // Lexicographic permutations of sorted men match sorted PreferenceList
    // order, so profile ids here agree with DomainProduct::enumerate_profiles.
    auto ranks_for = [&](std::size_t idx) {
        RankMatrix ranks(n_women, std::vector<int>(n_men));
        for (std::size_t w = n_women; w-- > 0;) {
            const auto& perm = perms[idx % perms.size()];
            idx /= perms.size();
            for (std::size_t r = 0; r < n_men; ++r) ranks[w][perm[r]] = static_cast<int>(r);
        }
        return ranks;
    };

    std::vector<std::pair<std::size_t, PatternWitness>> witnesses;
    long long hits = 0;
    const long long n = static_cast<long long>(total);

    auto scan_one = [&](std::size_t idx, std::vector<std::pair<std::size_t, PatternWitness>>& sink)
        -> bool {
        RankMatrix ranks = ranks_for(idx);
        bool hit = scan_rotations(
            ranks, n_men, n_women,
            [&](std::size_t a, std::size_t b, std::size_t c, std::size_t x, std::size_t y,
                std::size_t z) {
                sink.emplace_back(idx, PatternWitness{
                                           {market.men[a], market.men[b], market.men[c]},
                                           {market.women[x], market.women[y], market.women[z]}});
                return true;  // first witness per profile
            });
        return hit;
    };

    if (parallel) {
#pragma omp parallel
        {
            std::vector<std::pair<std::size_t, PatternWitness>> local;
#pragma omp for schedule(static) reduction(+ : hits)
            for (long long i = 0; i < n; ++i)
                if (scan_one(static_cast<std::size_t>(i), local)) ++hits;
#pragma omp critical
            witnesses.insert(witnesses.end(), local.begin(), local.end());
        }
        std::sort(witnesses.begin(), witnesses.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    } else {
        for (long long i = 0; i < n; ++i)
            if (scan_one(static_cast<std::size_t>(i), witnesses)) ++hits;
    }

    PatternReport report;
    report.men_count = n_men;
    report.women_count = n_women;
    report.trials = total;
    report.hits = static_cast<std::size_t>(hits);
    report.fraction = double(hits) / double(total);
    report.exhaustive = true;
    report.witnesses = std::move(witnesses);
    return report;
}

// ---------------------------------------------------------------------------
// 3x3 classification study
// ---------------------------------------------------------------------------

Market classify_market_3x3() {
    return Market::make({"a", "b", "c"}, {"x", "y", "z"},
                        {{"x", {"a", "b", "c"}}, {"y", {"a", "b", "c"}}, {"z", {"a", "b", "c"}}});
}

std::vector<Profile> all_full_women_profiles_3x3() {
    Market market = classify_market_3x3();
    return DomainProduct::full_lists(market, Side::Woman).enumerate_profiles();
}

std::vector<ClassifyRow> classify_3x3_subset(const std::vector<std::size_t>& ids, bool parallel) {
    Market base = classify_market_3x3();
    auto profiles = all_full_women_profiles_3x3();
    DomainProduct men_domain = DomainProduct::full_lists(base, Side::Man);

    std::vector<ClassifyRow> rows(ids.size());
    auto run_one = [&](std::size_t i) {
        std::size_t id = ids[i];
        Market market = base;
        market.women_profile = profiles.at(id);
        MatchingRule rule = make_rule("da", market);
        SynthesisOutcome res = decide_osp(rule, men_domain, market);
        rows[i] = ClassifyRow{id, profiles[id], res.feasible, res.explored_states};
    };

    const long long n = static_cast<long long>(ids.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
    } else {
        for (long long i = 0; i < n; ++i) run_one(static_cast<std::size_t>(i));
    }
    return rows;
}

std::vector<ClassifyRow> classify_3x3(bool parallel) {
    std::vector<std::size_t> ids(216);
    std::iota(ids.begin(), ids.end(), 0);
    return classify_3x3_subset(ids, parallel);
}

// ---------------------------------------------------------------------------
// Deferred-acceptance oracle sweep
// ---------------------------------------------------------------------------

DaSweepReport da_oracle_sweep(std::size_t n, bool parallel) {
    if (n < 1 || n > 3) throw GuardExceeded("the exhaustive sweep is capped at 3x3");
    Market market = letters_market(n, n);
    auto men_profiles = DomainProduct::full_lists(market, Side::Man).enumerate_profiles();
    auto women_profiles = DomainProduct::full_lists(market, Side::Woman).enumerate_profiles();

    long long pairs = 0, membership_failures = 0, optimality_failures = 0;
    const long long np = static_cast<long long>(men_profiles.size());

    auto check_pair = [&](const Profile& p, const Profile& q, long long& member_bad,
                          long long& optimal_bad) {
        Matching da = deferred_acceptance(p, q, market);
        auto stable_set = enumerate_stable(p, q, market);
        if (!std::binary_search(stable_set.begin(), stable_set.end(), da)) ++member_bad;
        for (const auto& mu : stable_set)
            for (const auto& m : market.men)
                if (!weakly_prefers_outcome(p.at(m), da.partner_of(m), mu.partner_of(m))) {
                    ++optimal_bad;
                    return;
                }
    };

#pragma omp parallel for schedule(dynamic) if (parallel) \
    reduction(+ : pairs, membership_failures, optimality_failures)
    for (long long i = 0; i < np; ++i)
        for (const auto& q : women_profiles) {
            ++pairs;
            check_pair(men_profiles[static_cast<std::size_t>(i)], q, membership_failures,
                       optimality_failures);
        }

    return {static_cast<std::size_t>(pairs), static_cast<std::size_t>(membership_failures),
            static_cast<std::size_t>(optimality_failures)};
}

// ---------------------------------------------------------------------------
// Reduction to the 3x3 impossibility block
// ---------------------------------------------------------------------------

SynthesisOutcome reduction_via_triple(const Market& market, const PatternWitness& triple) {
    const auto& [a, b, c] = triple.men;
    const auto& [x, y, z] = triple.women;
    auto L = [](std::initializer_list<AgentId> v) { return PreferenceList(std::vector<AgentId>(v)); };

    std::map<AgentId, std::vector<PreferenceList>> sets;
    sets[a] = {L({z, y, x}), L({y, x, z})};
    sets[b] = {L({x, z, y}), L({z, y, x})};
    sets[c] = {L({y, x, z}), L({x, z, y})};
    for (const auto& m : market.men)
        if (m != a && m != b && m != c) sets[m] = {PreferenceList{}};

    MatchingRule rule = make_rule("da", market);
    return decide_osp(rule, DomainProduct(std::move(sets)), market);
}

}  // namespace ospmatch
