#pragma once

#include <array>
#include <cstdint>

#include "ospmatch/stable.hpp"
#include "ospmatch/synthesis.hpp"

namespace ospmatch {

// An ordered triple of men and women whose restriction of the women's profile
// is the rotation x: a>b>c, y: b>c>a, z: c>a>b. Witnesses are reported once
// per rotation class (the lexicographically least woman leads).
struct PatternWitness {
    std::array<AgentId, 3> men;    // (a, b, c)
    std::array<AgentId, 3> women;  // (x, y, z)

    friend bool operator==(const PatternWitness&, const PatternWitness&) = default;
};

// All rotation witnesses in `q`. Each woman must rank the whole designated
// trio; relative order within longer lists is what counts.
std::vector<PatternWitness> tricyclical_triples(const Profile& q, const Market& market);

bool has_tricyclical_triple(const Profile& q, const Market& market);

struct PatternReport {
    std::size_t men_count = 0;
    std::size_t women_count = 0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    bool exhaustive = false;
    // Exhaustive mode only: (profile index, first witness) per hitting profile.
    std::vector<std::pair<std::size_t, PatternWitness>> witnesses;
};

// Draws `trials` women's profiles uniformly over full lists and counts those
// containing a rotation. Identical output for a fixed seed regardless of
// `parallel`; each trial derives its own generator from (seed, index).
PatternReport sample_pattern_frequency(std::size_t n_men, std::size_t n_women, std::size_t trials,
                                       std::uint64_t seed, bool parallel = true);

// Walks every full-list women's profile of an n_men x n_women market instead
// of sampling. Guarded by the profile count.
PatternReport exhaustive_pattern_frequency(std::size_t n_men, std::size_t n_women,
                                           bool parallel = true, std::size_t guard = 2'000'000);

struct ClassifyRow {
    std::size_t profile_id;  // position in the canonical full-list enumeration
    Profile q;
    bool implementable;
    std::size_t states_explored;
};

// Runs decide_osp against the men-optimal stable rule for every full-list 3x3
// women's profile. Rows are independent; each search owns a private memo, so
// per-row state counts do not depend on scheduling.
std::vector<ClassifyRow> classify_3x3(bool parallel = true);

// Same procedure restricted to the given profile ids (useful for tests and
// benchmarks; ids refer to the canonical enumeration).
std::vector<ClassifyRow> classify_3x3_subset(const std::vector<std::size_t>& ids,
                                             bool parallel = true);

// The canonical 3x3 market/profile enumeration used by classify_3x3.
Market classify_market_3x3();
std::vector<Profile> all_full_women_profiles_3x3();

struct DaSweepReport {
    std::size_t pairs_checked = 0;
    std::size_t stable_membership_failures = 0;  // DA output not in the enumerated stable set
    std::size_t optimality_failures = 0;         // some man strictly prefers another stable matching
};

// For every (men's, women's) full-list profile pair of an n x n market:
// checks that deferred acceptance lands in the brute-force stable set and is
// men-optimal within it. n is capped at 3 (the 3x3 sweep is 46656 pairs).
DaSweepReport da_oracle_sweep(std::size_t n, bool parallel = true);

// Finds the embedded rotation of a profile (any market size), builds the
// reduced two-list domains around it plus empty lists for bystander men, and
// runs decide_osp on the men-optimal stable rule. Returns the outcome; an
// infeasible certificate classifies q as not OSP-implementable.
SynthesisOutcome reduction_via_triple(const Market& market, const PatternWitness& triple);

}  // namespace ospmatch
