#include "ospmatch/synthesis.hpp"

#include <array>
#include <bit>
#include <functional>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "ospmatch/osp.hpp"
#include "ospmatch/partition.hpp"

namespace ospmatch {

// ---------------------------------------------------------------------------
// Set partitions
// ---------------------------------------------------------------------------

namespace {

std::vector<SetPartition> generate_partitions(std::size_t n) {
    // Restricted growth strings in lexicographic order; cell ids follow first
    // occurrence, so cells come out ordered by smallest member.
    std::vector<std::pair<std::size_t, SetPartition>> with_count;
    std::vector<int> rgs(n, 0);
    std::function<void(std::size_t, int)> gen = [&](std::size_t i, int maxv) {
        if (i == n) {
            std::size_t cells = static_cast<std::size_t>(maxv) + 1;
            if (cells < 2) return;
            SetPartition part(cells, 0);
            for (std::size_t j = 0; j < n; ++j) part[rgs[j]] |= std::uint64_t{1} << j;
            with_count.emplace_back(cells, std::move(part));
            return;
        }
        for (int v = 0; v <= maxv + 1; ++v) {
            rgs[i] = v;
            gen(i + 1, std::max(maxv, v));
        }
    };
    if (n >= 2) gen(0, -1);
    std::stable_sort(with_count.begin(), with_count.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<SetPartition> out;
    out.reserve(with_count.size());
    for (auto& [_, p] : with_count) out.push_back(std::move(p));
    return out;
}

}  // namespace

const std::vector<SetPartition>& multi_cell_partitions(std::size_t n) {
    if (n > 9) throw GuardExceeded("set-partition enumeration capped at 9 elements");
    static std::mutex mu;
    static std::map<std::size_t, std::vector<SetPartition>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, generate_partitions(n)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// Tree construction helpers
// ---------------------------------------------------------------------------

namespace {

struct TreeCtor {
    MechanismTree t;

    int add(std::optional<AgentId> actor, std::optional<Matching> leaf, int parent, Predicate via) {
        MechanismTree::Node n;
        n.id = static_cast<int>(t.nodes.size());
        n.actor = std::move(actor);
        n.leaf = std::move(leaf);
        n.parent = parent;
        n.in_predicate = std::move(via);
        int idx = n.id;
        t.nodes.push_back(std::move(n));
        if (parent == -1)
            t.root = idx;
        else
            t.nodes[parent].children.push_back(idx);
        return idx;
    }
    int internal(const AgentId& a, int parent, Predicate via) {
        return add(a, std::nullopt, parent, std::move(via));
    }
    int leaf(Matching m, int parent, Predicate via) {
        return add(std::nullopt, std::move(m), parent, std::move(via));
    }
};

// Recursive machinery shared by the aligned, 2x2, and acyclical constructions:
// a market state of unmatched agents plus the per-man set of preference lists
// still possible given his answers so far. Assumes balanced full-list markets.
struct AcyclicalBuilder {
    const Market& market;
    TreeCtor& ctor;

    struct State {
        std::set<AgentId> men_left, women_left;
        std::map<AgentId, Predicate> residual;
        std::vector<std::pair<AgentId, AgentId>> assigned;
    };

    static State assign(State st, const AgentId& m, const AgentId& w) {
        st.men_left.erase(m);
        st.women_left.erase(w);
        st.residual.erase(m);
        st.assigned.emplace_back(m, w);
        return st;
    }

    std::map<AgentId, std::vector<PreferenceList>> cells_by_top(const Predicate& r,
                                                                const std::set<AgentId>& women) const {
        std::map<AgentId, std::vector<PreferenceList>> cells;
        for (const auto& l : r.lists()) {
            auto top = l.top_among(women);
            if (!top) throw std::logic_error("full list with no top among remaining women");
            cells[*top].push_back(l);
        }
        return cells;
    }

    using Cont = std::function<void(State, int, Predicate)>;

    // Ask m for his top choice among the remaining women; forced answers are
    // not asked. Continues with `k` after assigning.
    void pick_by_top(State st, const AgentId& m, int parent, Predicate via, const Cont& k) {
        auto cells = cells_by_top(st.residual.at(m), st.women_left);
        if (cells.size() == 1) {
            const auto& [w, _] = *cells.begin();
            k(assign(std::move(st), m, w), parent, std::move(via));
            return;
        }
        int node = ctor.internal(m, parent, std::move(via));
        for (const auto& [w, lists] : cells)
            k(assign(st, m, w), node, Predicate(lists));
    }

    void stage(State st, int parent, Predicate via) {
        if (st.men_left.empty()) {
            ctor.leaf(Matching(st.assigned), parent, std::move(via));
            return;
        }
        if (st.men_left.size() == 1) {
            if (st.women_left.size() != 1) throw std::logic_error("unbalanced sub-market");
            const AgentId& m = *st.men_left.begin();
            const AgentId& w = *st.women_left.begin();
            State done = assign(std::move(st), m, w);
            ctor.leaf(Matching(done.assigned), parent, std::move(via));
            return;
        }

        // Men currently ranked first by some remaining woman.
        std::set<AgentId> tops;
        std::map<AgentId, std::vector<AgentId>> topped_by;  // man -> sorted women topping him
        for (const auto& w : st.women_left) {
            auto top = market.women_profile.at(w).top_among(st.men_left);
            if (!top) throw std::logic_error("woman with no remaining acceptable man");
            tops.insert(*top);
            topped_by[*top].push_back(w);
        }

        if (tops.size() == 1) {
            pick_by_top(std::move(st), *tops.begin(), parent, std::move(via),
                        [this](State s, int p, Predicate v) { stage(std::move(s), p, std::move(v)); });
            return;
        }
        if (tops.size() != 2)
            throw std::logic_error("more than two top-ranked men; profile restriction is cyclical");

        const AgentId& first = *tops.begin();
        const AgentId& second = *std::next(tops.begin());
        std::vector<std::pair<AgentId, AgentId>> qs;
        for (const auto& w : topped_by[first]) qs.emplace_back(first, w);
        for (const auto& w : topped_by[second]) qs.emplace_back(second, w);
        questions(std::move(st), qs, 0, first, second, parent, std::move(via));
    }

    // One yes/no question per (man, woman-topping-him), then both leftover men
    // pick their tops, which lie in each other's question set.
    void questions(State st, const std::vector<std::pair<AgentId, AgentId>>& qs, std::size_t i,
                   const AgentId& first, const AgentId& second, int parent, Predicate via) {
        if (i == qs.size()) {
            pick_by_top(std::move(st), first, parent, std::move(via),
                        [this, second](State s1, int p1, Predicate v1) {
                            pick_by_top(std::move(s1), second, p1, std::move(v1),
                                        [this](State s2, int p2, Predicate v2) {
                                            stage(std::move(s2), p2, std::move(v2));
                                        });
                        });
            return;
        }
        const auto& [m, w] = qs[i];
        const Predicate& r = st.residual.at(m);
        std::vector<PreferenceList> yes;
        for (const auto& l : r.lists())
            if (l.top_among(st.women_left) == std::optional<AgentId>{w}) yes.push_back(l);

        if (yes.size() == r.size()) {
            stage(assign(std::move(st), m, w), parent, std::move(via));
            return;
        }
        if (yes.empty()) {
            questions(std::move(st), qs, i + 1, first, second, parent, std::move(via));
            return;
        }
        Predicate yes_pred{yes};
        Predicate no_pred = r.subtract(yes_pred);
        int node = ctor.internal(m, parent, std::move(via));
        stage(assign(st, m, w), node, std::move(yes_pred));
        State rest = std::move(st);
        rest.residual[m] = no_pred;
        questions(std::move(rest), qs, i + 1, first, second, node, std::move(no_pred));
    }

    State initial_state(const DomainProduct& domains) const {
        State st;
        st.men_left.insert(market.men.begin(), market.men.end());
        st.women_left.insert(market.women.begin(), market.women.end());
        for (const auto& m : market.men) st.residual.emplace(m, Predicate(domains.at(m)));
        return st;
    }
};

void require_full_women_lists(const Market& market) {
    for (const auto& w : market.women)
        if (market.women_profile.at(w).size() != market.men.size())
            throw std::invalid_argument("woman " + w.name + " must rank every man");
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructive builders
// ---------------------------------------------------------------------------

MechanismTree serial_dictatorship(const PreferenceList& q, const Market& market,
                                  const std::optional<DomainProduct>& domains_opt) {
    for (const auto& w : market.women)
        if (!(market.women_profile.at(w) == q))
            throw std::invalid_argument("serial dictatorship requires all women to share one list");

    DomainProduct domains =
        domains_opt ? *domains_opt : DomainProduct::all_lists(market, Side::Man);

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = domains;

    const std::vector<AgentId>& order = q.ranked();

    std::function<void(std::size_t, std::set<AgentId>, std::vector<std::pair<AgentId, AgentId>>,
                       int, Predicate)>
        step = [&](std::size_t pos, std::set<AgentId> remaining,
                   std::vector<std::pair<AgentId, AgentId>> assigned, int parent, Predicate via) {
            if (pos == order.size() || remaining.empty()) {
                ctor.leaf(Matching(assigned), parent, std::move(via));
                return;
            }
            const AgentId& m = order[pos];
            std::map<AgentId, std::vector<PreferenceList>> cells;
            std::vector<PreferenceList> pass;  // lists naming no remaining woman
            for (const auto& l : domains.at(m)) {
                auto top = l.top_among(remaining);
                if (top)
                    cells[*top].push_back(l);
                else
                    pass.push_back(l);
            }
            std::size_t branches = cells.size() + (pass.empty() ? 0 : 1);
            if (branches == 1) {
                if (!cells.empty()) {
                    auto rem = remaining;
                    rem.erase(cells.begin()->first);
                    assigned.emplace_back(m, cells.begin()->first);
                    step(pos + 1, std::move(rem), std::move(assigned), parent, std::move(via));
                } else {
                    step(pos + 1, std::move(remaining), std::move(assigned), parent, std::move(via));
                }
                return;
            }
            int node = ctor.internal(m, parent, std::move(via));
            for (const auto& [w, lists] : cells) {
                auto rem = remaining;
                rem.erase(w);
                auto asg = assigned;
                asg.emplace_back(m, w);
                step(pos + 1, std::move(rem), std::move(asg), node, Predicate(lists));
            }
            if (!pass.empty()) step(pos + 1, remaining, assigned, node, Predicate(pass));
        };

    std::set<AgentId> all_women(market.women.begin(), market.women.end());
    step(0, std::move(all_women), {}, -1, Predicate{});
    return std::move(ctor.t);
}

MechanismTree build_two_by_two(const Market& market) {
    if (market.men.size() != 2 || market.women.size() != 2)
        throw std::invalid_argument("market is not 2x2");
    require_full_women_lists(market);

    const AgentId& x = market.women[0];
    const AgentId& y = market.women[1];
    if (market.women_profile.at(x) == market.women_profile.at(y))
        return serial_dictatorship(market.women_profile.at(x), market,
                                   DomainProduct::full_lists(market, Side::Man));

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = DomainProduct::full_lists(market, Side::Man);
    AcyclicalBuilder b{market, ctor};
    b.stage(b.initial_state(ctor.t.domains), -1, Predicate{});
    return std::move(ctor.t);
}

MechanismTree build_acyclical(const Market& market) {
    if (market.men.size() != market.women.size())
        throw std::invalid_argument("acyclical construction requires a balanced market");
    require_full_women_lists(market);
    auto cyc = is_cyclical(market.women_profile, market);
    if (cyc.cyclical) throw CyclicalProfileError(*cyc.witness);

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = DomainProduct::full_lists(market, Side::Man);
    AcyclicalBuilder b{market, ctor};
    b.stage(b.initial_state(ctor.t.domains), -1, Predicate{});
    return std::move(ctor.t);
}

std::pair<MechanismTree, Market> fixture_example3() {
    Market market = Market::make({"a", "b", "c"}, {"x", "y", "z"},
                                 {{"x", {"a", "b", "c"}}, {"y", {"a", "c", "b"}}, {"z", {"b", "a", "c"}}});
    const AgentId a = man("a"), b = man("b"), c = man("c");
    const AgentId x = woman("x"), y = woman("y"), z = woman("z");

    auto L = [](std::initializer_list<const char*> names) {
        std::vector<AgentId> v;
        for (const char* n : names) v.push_back(woman(n));
        return PreferenceList(std::move(v));
    };
    const auto xyz = L({"x", "y", "z"}), xzy = L({"x", "z", "y"}), yxz = L({"y", "x", "z"}),
               yzx = L({"y", "z", "x"}), zxy = L({"z", "x", "y"}), zyx = L({"z", "y", "x"});

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = DomainProduct::full_lists(market, Side::Man);
    AcyclicalBuilder bld{market, ctor};

    auto state_for = [&](std::vector<AgentId> men_left, std::vector<AgentId> women_left,
                         std::map<AgentId, Predicate> residual,
                         std::vector<std::pair<AgentId, AgentId>> assigned) {
        AcyclicalBuilder::State st;
        st.men_left.insert(men_left.begin(), men_left.end());
        st.women_left.insert(women_left.begin(), women_left.end());
        st.residual = std::move(residual);
        st.assigned = std::move(assigned);
        return st;
    };
    const Predicate full_six{{xyz, xzy, yxz, yzx, zxy, zyx}};

    // Step 1: is x a's top?
    int n1 = ctor.internal(a, -1, Predicate{});
    bld.stage(state_for({b, c}, {y, z}, {{b, full_six}, {c, full_six}}, {{a, x}}), n1,
              Predicate{{xyz, xzy}});
    // Step 2: is y a's top?
    int n2 = ctor.internal(a, n1, Predicate{{yxz, yzx, zxy, zyx}});
    bld.stage(state_for({b, c}, {x, z}, {{b, full_six}, {c, full_six}}, {{a, y}}), n2,
              Predicate{{yxz, yzx}});
    // a's top is z. Step 3: is z b's top?
    const Predicate a_rest{{zxy, zyx}};
    int n3 = ctor.internal(b, n2, Predicate{{zxy, zyx}});
    bld.stage(state_for({a, c}, {x, y}, {{a, a_rest}, {c, full_six}}, {{b, z}}), n3,
              Predicate{{zxy, zyx}});
    // Step 4: is x b's top?
    int n4 = ctor.internal(b, n3, Predicate{{xyz, xzy, yxz, yzx}});
    bld.stage(state_for({a, c}, {y, z}, {{a, a_rest}, {c, full_six}}, {{b, x}}), n4,
              Predicate{{xyz, xzy}});
    // b's top is y. Step 5: does c prefer x over y?
    int n5 = ctor.internal(c, n4, Predicate{{yxz, yzx}});
    ctor.leaf(Matching({{a, z}, {b, y}, {c, x}}), n5, Predicate{{xyz, xzy, zxy}});
    // Step 6: does b prefer z over x?
    const Predicate c_rest{{yxz, yzx, zyx}};
    int n6 = ctor.internal(b, n5, Predicate{{yxz, yzx, zyx}});
    bld.stage(state_for({a, c}, {x, y}, {{a, a_rest}, {c, c_rest}}, {{b, z}}), n6,
              Predicate{{yzx}});
    bld.stage(state_for({a, c}, {y, z}, {{a, a_rest}, {c, c_rest}}, {{b, x}}), n6,
              Predicate{{yxz}});

    return {std::move(ctor.t), std::move(market)};
}

MechanismTree direct_revelation(const MatchingRule& target, const DomainProduct& domains,
                                const Market& market, std::size_t guard) {
    if (domains.profile_count() > guard)
        throw GuardExceeded("direct-revelation tree would exceed the node guard");
    std::vector<AgentId> agents = domains.agents();

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = domains;

    std::function<void(std::size_t, Profile, int, Predicate)> step =
        [&](std::size_t i, Profile acc, int parent, Predicate via) {
            if (i == agents.size()) {
                ctor.leaf(target.evaluate(acc), parent, std::move(via));
                return;
            }
            int node = ctor.internal(agents[i], parent, std::move(via));
            for (const auto& l : domains.at(agents[i]))
                step(i + 1, acc.with(agents[i], l), node, Predicate{{l}});
        };
    step(0, Profile{}, -1, Predicate{});
    return std::move(ctor.t);
}

// ---------------------------------------------------------------------------
// decide_osp: complete memoized search
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxAgents = 8;
using State = std::array<std::uint16_t, kMaxAgents>;

struct SearchIx {
    std::vector<AgentId> agents;
    std::vector<std::vector<PreferenceList>> lists;  // sorted, per agent
    std::vector<int> sizes;
    std::vector<std::size_t> strides;  // last agent varies fastest
    std::size_t total = 1;
    std::vector<std::vector<AgentId>> opp;         // per agent: opposite side, sorted
    std::vector<std::vector<std::int8_t>> outcome;  // [agent][profile] -> code, opp size = unmatched
    std::vector<int> matching_of;                   // [profile] -> matching id
    std::vector<Matching> matchings;
    std::vector<std::vector<std::vector<std::int8_t>>> rank;  // [agent][list][code]
};

SearchIx build_index(const MatchingRule& target, const DomainProduct& domains,
                     const Market& market, std::size_t profile_guard) {
    SearchIx ix;
    for (const auto& [agent, lists] : domains.sets()) {
        ix.agents.push_back(agent);
        ix.lists.push_back(lists);
        ix.sizes.push_back(static_cast<int>(lists.size()));
    }
    const std::size_t k = ix.agents.size();
    if (k == 0) throw std::invalid_argument("decide_osp needs at least one strategic agent");
    if (k > kMaxAgents) throw GuardExceeded("decide_osp supports at most 8 strategic agents");
    std::size_t total_bits = 0;
    for (int s : ix.sizes) {
        if (s > 9) throw GuardExceeded("decide_osp caps per-agent domain sets at 9 lists");
        total_bits += static_cast<std::size_t>(s);
    }
    if (total_bits > 64) throw GuardExceeded("decide_osp domain masks exceed 64 bits");

    ix.total = domains.profile_count();
    if (ix.total > profile_guard)
        throw GuardExceeded("domain product exceeds the decide_osp profile guard");

    ix.strides.assign(k, 1);
    for (std::size_t i = k; i-- > 1;) ix.strides[i - 1] = ix.strides[i] * ix.sizes[i];

    for (std::size_t a = 0; a < k; ++a)
        ix.opp.push_back(ix.agents[a].side == Side::Man ? market.women : market.men);

    ix.outcome.assign(k, std::vector<std::int8_t>(ix.total, -1));
    ix.matching_of.assign(ix.total, -1);
    std::map<Matching, int> matching_ids;

    for (std::size_t idx = 0; idx < ix.total; ++idx) {
        Profile p;
        std::size_t rest = idx;
        for (std::size_t a = 0; a < k; ++a) {
            std::size_t sel = rest / ix.strides[a];
            rest %= ix.strides[a];
            p.set(ix.agents[a], ix.lists[a][sel]);
        }
        Matching mu;
        try {
            mu = target.evaluate(p);
        } catch (const std::exception& e) {
            throw std::invalid_argument(std::string("target rule is not total on the domains: ") +
                                        e.what());
        }
        validate_matching(mu, market);
        auto [it, fresh] = matching_ids.emplace(mu, static_cast<int>(ix.matchings.size()));
        if (fresh) ix.matchings.push_back(mu);
        ix.matching_of[idx] = it->second;
        for (std::size_t a = 0; a < k; ++a) {
            Outcome o = mu.partner_of(ix.agents[a]);
            if (!o) {
                ix.outcome[a][idx] = static_cast<std::int8_t>(ix.opp[a].size());
            } else {
                auto pos = std::find(ix.opp[a].begin(), ix.opp[a].end(), *o);
                if (pos == ix.opp[a].end())
                    throw std::invalid_argument("target matched " + ix.agents[a].name +
                                                " outside the market");
                ix.outcome[a][idx] = static_cast<std::int8_t>(pos - ix.opp[a].begin());
            }
        }
    }

    ix.rank.resize(k);
    for (std::size_t a = 0; a < k; ++a) {
        ix.rank[a].resize(ix.lists[a].size());
        for (std::size_t l = 0; l < ix.lists[a].size(); ++l) {
            auto& row = ix.rank[a][l];
            row.resize(ix.opp[a].size() + 1);
            for (std::size_t c = 0; c <= ix.opp[a].size(); ++c) {
                Outcome o = c == ix.opp[a].size() ? Outcome{} : Outcome{ix.opp[a][c]};
                row[c] = static_cast<std::int8_t>(outcome_rank(ix.lists[a][l], o));
            }
        }
    }
    return ix;
}

// Memo entry packed into a uint32: low 2 bits are the kind, the payload is a
// matching id for leaves or (agent, partition index) for splits.
constexpr std::uint32_t kUnvisited = 0;
constexpr std::uint32_t kLeaf = 1, kSplit = 2, kInfeasible = 3;

std::uint32_t encode_leaf(int matching_id) {
    return kLeaf | (static_cast<std::uint32_t>(matching_id) << 2);
}
std::uint32_t encode_split(std::size_t agent, std::size_t partition_index) {
    return kSplit | (static_cast<std::uint32_t>(agent) << 2) |
           (static_cast<std::uint32_t>(partition_index) << 6);
}

struct Searcher {
    const SearchIx& ix;
    std::size_t k;
    std::vector<std::size_t> bit_offset;
    std::size_t total_bits = 0;
    bool flat = false;
    std::vector<std::uint32_t> flat_memo;
    std::unordered_map<std::uint64_t, std::uint32_t> map_memo;
    std::size_t explored = 0;

    explicit Searcher(const SearchIx& index) : ix(index), k(index.agents.size()) {
        bit_offset.resize(k);
        for (std::size_t a = 0; a < k; ++a) {
            bit_offset[a] = total_bits;
            total_bits += static_cast<std::size_t>(ix.sizes[a]);
        }
        flat = total_bits <= 20;
        if (flat) flat_memo.assign(std::size_t{1} << total_bits, kUnvisited);
    }

    std::uint64_t pack(const State& s) const {
        std::uint64_t key = 0;
        for (std::size_t a = 0; a < k; ++a) key |= static_cast<std::uint64_t>(s[a]) << bit_offset[a];
        return key;
    }
    std::uint32_t get(const State& s) const {
        std::uint64_t key = pack(s);
        if (flat) return flat_memo[key];
        auto it = map_memo.find(key);
        return it == map_memo.end() ? kUnvisited : it->second;
    }
    void put(const State& s, std::uint32_t v) {
        std::uint64_t key = pack(s);
        if (flat)
            flat_memo[key] = v;
        else
            map_memo[key] = v;
    }

    template <typename F>
    void for_each_profile(const State& s, F&& f) const {
        // Odometer over the set bits of every agent's mask.
        std::array<std::array<std::uint8_t, 16>, kMaxAgents> sel{};
        std::array<std::size_t, kMaxAgents> counts{}, pos{};
        std::size_t base = 0;
        for (std::size_t a = 0; a < k; ++a) {
            std::size_t n = 0;
            for (int b = 0; b < ix.sizes[a]; ++b)
                if (s[a] >> b & 1) sel[a][n++] = static_cast<std::uint8_t>(b);
            counts[a] = n;
            base += sel[a][0] * ix.strides[a];
        }
        while (true) {
            if (!f(base)) return;
            std::size_t a = k;
            while (a-- > 0) {
                base -= sel[a][pos[a]] * ix.strides[a];
                if (++pos[a] < counts[a]) {
                    base += sel[a][pos[a]] * ix.strides[a];
                    break;
                }
                pos[a] = 0;
                base += sel[a][0] * ix.strides[a];
                if (a == 0) return;
            }
        }
    }

    bool realizable(const State& s) {
        std::uint32_t cached = get(s);
        if (cached != kUnvisited) return (cached & 3) != kInfeasible;
        ++explored;

        // Leaf test: the target must be one constant matching on this product.
        int mid = -1;
        bool constant = true;
        for_each_profile(s, [&](std::size_t idx) {
            int m = ix.matching_of[idx];
            if (mid == -1) mid = m;
            if (m != mid) {
                constant = false;
                return false;
            }
            return true;
        });
        if (constant) {
            put(s, encode_leaf(mid));
            return true;
        }

        for (std::size_t a = 0; a < k; ++a) {
            int n = std::popcount(s[a]);
            if (n < 2) continue;
            std::array<std::uint8_t, 9> items{};
            {
                int j = 0;
                for (int b = 0; b < ix.sizes[a]; ++b)
                    if (s[a] >> b & 1) items[j++] = static_cast<std::uint8_t>(b);
            }

            // Outcome codes each list can reach across completions by the others.
            std::array<std::uint32_t, 9> outs{};
            {
                std::array<std::array<std::uint8_t, 16>, kMaxAgents> sel{};
                std::array<std::size_t, kMaxAgents> counts{}, pos{};
                std::size_t base = 0;
                for (std::size_t b2 = 0; b2 < k; ++b2) {
                    if (b2 == a) {
                        counts[b2] = 1;
                        sel[b2][0] = 0;
                        continue;
                    }
                    std::size_t n2 = 0;
                    for (int b = 0; b < ix.sizes[b2]; ++b)
                        if (s[b2] >> b & 1) sel[b2][n2++] = static_cast<std::uint8_t>(b);
                    counts[b2] = n2;
                    base += sel[b2][0] * ix.strides[b2];
                }
                while (true) {
                    for (int j = 0; j < n; ++j)
                        outs[j] |= std::uint32_t{1}
                                   << ix.outcome[a][base + items[j] * ix.strides[a]];
                    std::size_t b2 = k;
                    bool done = false;
                    while (b2-- > 0) {
                        if (b2 == a) {
                            if (b2 == 0) done = true;
                            continue;
                        }
                        base -= sel[b2][pos[b2]] * ix.strides[b2];
                        if (++pos[b2] < counts[b2]) {
                            base += sel[b2][pos[b2]] * ix.strides[b2];
                            break;
                        }
                        pos[b2] = 0;
                        base += sel[b2][0] * ix.strides[b2];
                        if (b2 == 0) done = true;
                    }
                    if (done) break;
                }
            }

            // worst[j]: worst rank list j can get; best[j][j2]: best rank of
            // list j2's outcomes, both measured with list j's ranking.
            std::array<std::int8_t, 9> worst{};
            std::array<std::array<std::int8_t, 9>, 9> best{};
            for (int j = 0; j < n; ++j) {
                const auto& row = ix.rank[a][items[j]];
                std::int8_t w = -1;
                for (std::size_t c = 0; c < row.size(); ++c)
                    if (outs[j] >> c & 1) w = std::max(w, row[c]);
                worst[j] = w;
                for (int j2 = 0; j2 < n; ++j2) {
                    std::int8_t b = std::numeric_limits<std::int8_t>::max();
                    for (std::size_t c = 0; c < row.size(); ++c)
                        if (outs[j2] >> c & 1) b = std::min(b, row[c]);
                    best[j][j2] = b;
                }
            }

            // Lists that cannot be separated must share a cell.
            std::vector<std::pair<int, int>> glued;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (worst[i] > best[i][j] || worst[j] > best[j][i]) glued.emplace_back(i, j);

            {
                // Union-find just to skip the agent when everything is glued.
                std::array<int, 9> comp{};
                for (int i = 0; i < n; ++i) comp[i] = i;
                std::function<int(int)> find = [&](int v) {
                    while (comp[v] != v) v = comp[v] = comp[comp[v]];
                    return v;
                };
                for (auto [i, j] : glued) comp[find(i)] = find(j);
                int roots = 0;
                for (int i = 0; i < n; ++i)
                    if (find(i) == i) ++roots;
                if (roots < 2) continue;
            }

            const auto& parts = multi_cell_partitions(static_cast<std::size_t>(n));
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                const SetPartition& cells = parts[pi];
                bool ok = true;
                for (auto [i, j] : glued) {
                    bool together = false;
                    for (const auto& cell : cells)
                        if ((cell >> i & 1) && (cell >> j & 1)) {
                            together = true;
                            break;
                        }
                    if (!together) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;

                for (const auto& cell : cells) {
                    State child = s;
                    std::uint16_t mask = 0;
                    for (int i = 0; i < n; ++i)
                        if (cell >> i & 1) mask |= std::uint16_t(1) << items[i];
                    child[a] = mask;
                    if (!realizable(child)) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    put(s, encode_split(a, pi));
                    return true;
                }
            }
        }
        put(s, kInfeasible);
        return false;
    }

    int build_tree(const State& s, int parent, Predicate via, TreeCtor& ctor) const {
        std::uint32_t v = get(s);
        if ((v & 3) == kLeaf) {
            return ctor.leaf(ix.matchings[v >> 2], parent, std::move(via));
        }
        if ((v & 3) != kSplit) throw std::logic_error("building a tree from an infeasible state");
        std::size_t a = (v >> 2) & 0xF;
        std::size_t pi = v >> 6;
        int n = std::popcount(s[a]);
        std::array<std::uint8_t, 9> items{};
        {
            int j = 0;
            for (int b = 0; b < ix.sizes[a]; ++b)
                if (s[a] >> b & 1) items[j++] = static_cast<std::uint8_t>(b);
        }
        int node = ctor.internal(ix.agents[a], parent, std::move(via));
        const SetPartition& cells = multi_cell_partitions(static_cast<std::size_t>(n))[pi];
        for (const auto& cell : cells) {
            State child = s;
            std::uint16_t mask = 0;
            std::vector<PreferenceList> lists;
            for (int i = 0; i < n; ++i)
                if (cell >> i & 1) {
                    mask |= std::uint16_t(1) << items[i];
                    lists.push_back(ix.lists[a][items[i]]);
                }
            child[a] = mask;
            build_tree(child, node, Predicate(std::move(lists)), ctor);
        }
        return node;
    }
};

}  // namespace

SynthesisOutcome decide_osp(const MatchingRule& target, const DomainProduct& domains,
                            const Market& market, std::size_t profile_guard) {
    SearchIx ix = build_index(target, domains, market, profile_guard);
    Searcher searcher(ix);

    State root{};
    for (std::size_t a = 0; a < searcher.k; ++a)
        root[a] = static_cast<std::uint16_t>((std::uint32_t{1} << ix.sizes[a]) - 1);

    bool feasible = searcher.realizable(root);
    SynthesisOutcome out;
    out.feasible = feasible;
    out.explored_states = searcher.explored;
    out.domains = domains;
    out.target_label = target.label;
    if (!feasible) return out;

    TreeCtor ctor;
    ctor.t.men = market.men;
    ctor.t.women = market.women;
    ctor.t.domains = domains;
    searcher.build_tree(root, -1, Predicate{}, ctor);
    MechanismTree mech = std::move(ctor.t);

    // Independent re-verification before anything is returned.
    if (!validate(mech).valid)
        throw std::logic_error("synthesized mechanism failed structural validation");
    if (!verify_osp(mech).osp)
        throw std::logic_error("synthesized mechanism failed the OSP verifier");
    for (const auto& p : domains.enumerate_profiles(profile_guard))
        if (!(evaluate(mech, p).first == target.evaluate(p)))
            throw std::logic_error("synthesized mechanism disagrees with the target rule");

    out.mechanism = std::move(mech);
    return out;
}

}  // namespace ospmatch
