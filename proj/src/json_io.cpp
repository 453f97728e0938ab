#include "ospmatch/json_io.hpp"

#include <fstream>
#include <sstream>

namespace ospmatch {

namespace {

AgentId resolve_name(const std::string& name, const Market& market) {
    bool m = std::binary_search(market.men.begin(), market.men.end(), man(name));
    bool w = std::binary_search(market.women.begin(), market.women.end(), woman(name));
    if (m && w) throw std::invalid_argument("ambiguous participant name: " + name);
    if (m) return man(name);
    if (w) return woman(name);
    throw std::invalid_argument("unknown participant: " + name);
}

json list_to_json(const PreferenceList& l) {
    json arr = json::array();
    for (const auto& a : l.ranked()) arr.push_back(a.name);
    return arr;
}

PreferenceList list_from_json(const json& arr, Side entry_side) {
    std::vector<AgentId> ranked;
    for (const auto& e : arr) ranked.push_back({entry_side, e.get<std::string>()});
    return PreferenceList(std::move(ranked));
}

json outcome_to_json(const Outcome& o) { return o ? json(o->name) : json(nullptr); }

}  // namespace

json market_to_json(const Market& market) {
    json j;
    j["men"] = json::array();
    for (const auto& m : market.men) j["men"].push_back(m.name);
    j["women"] = json::array();
    for (const auto& w : market.women) j["women"].push_back(w.name);
    json wp = json::object();
    for (const auto& [w, l] : market.women_profile.lists()) wp[w.name] = list_to_json(l);
    j["women_prefs"] = wp;
    if (market.men_profile) {
        json mp = json::object();
        for (const auto& [m, l] : market.men_profile->lists()) mp[m.name] = list_to_json(l);
        j["men_prefs"] = mp;
    }
    return j;
}

Market market_from_json(const json& j) {
    std::vector<std::string> men = j.at("men").get<std::vector<std::string>>();
    std::vector<std::string> women = j.at("women").get<std::vector<std::string>>();
    std::map<std::string, std::vector<std::string>> wp, mp;
    for (const auto& [name, arr] : j.at("women_prefs").items())
        wp[name] = arr.get<std::vector<std::string>>();
    if (j.contains("men_prefs")) {
        for (const auto& [name, arr] : j.at("men_prefs").items())
            mp[name] = arr.get<std::vector<std::string>>();
        return Market::make(men, women, wp, mp);
    }
    return Market::make(men, women, wp);
}

json profile_to_json(const Profile& p) {
    json j = json::object();
    for (const auto& [a, l] : p.lists()) j[a.name] = list_to_json(l);
    return j;
}

Profile profile_from_json(const json& j, const Market& market) {
    Profile p;
    for (const auto& [name, arr] : j.items()) {
        AgentId owner = resolve_name(name, market);
        p.set(owner, list_from_json(arr, opposite(owner.side)));
    }
    return p;
}

json matching_to_json(const Matching& mu) {
    json j = json::object();
    for (const auto& [m, w] : mu.pairs()) j[m.name] = w.name;
    return j;
}

Matching matching_from_json(const json& j, const Market& market) {
    std::vector<std::pair<AgentId, AgentId>> pairs;
    for (const auto& [m, w] : j.items()) pairs.emplace_back(man(m), woman(w.get<std::string>()));
    Matching mu{std::move(pairs)};
    validate_matching(mu, market);
    return mu;
}

json domains_to_json(const DomainProduct& d) {
    json j = json::object();
    for (const auto& [a, lists] : d.sets()) {
        json arr = json::array();
        for (const auto& l : lists) arr.push_back(list_to_json(l));
        j[a.name] = arr;
    }
    return j;
}

DomainProduct domains_from_json(const json& j, const Market& market) {
    std::map<AgentId, std::vector<PreferenceList>> sets;
    for (const auto& [name, arr] : j.items()) {
        AgentId owner = resolve_name(name, market);
        std::vector<PreferenceList> lists;
        for (const auto& l : arr) lists.push_back(list_from_json(l, opposite(owner.side)));
        sets[owner] = std::move(lists);
    }
    return DomainProduct(std::move(sets));
}

json mechanism_to_json(const MechanismTree& mech) {
    json j;
    j["men"] = json::array();
    for (const auto& m : mech.men) j["men"].push_back(m.name);
    j["women"] = json::array();
    for (const auto& w : mech.women) j["women"].push_back(w.name);
    j["domains"] = domains_to_json(mech.domains);

    json nodes = json::array();
    json edges = json::array();
    for (const auto& n : mech.nodes) {
        json nj;
        nj["id"] = n.id;
        if (n.actor)
            nj["actor"] = n.actor->name;
        else
            nj["leaf"] = matching_to_json(*n.leaf);
        nodes.push_back(std::move(nj));
        for (int c : n.children) {
            const auto& child = mech.node(c);
            json ej;
            ej["from"] = n.id;
            ej["to"] = child.id;
            json lists = json::array();
            for (const auto& l : child.in_predicate.lists()) lists.push_back(list_to_json(l));
            ej["lists"] = std::move(lists);
            edges.push_back(std::move(ej));
        }
    }
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j;
}

MechanismTree mechanism_from_json(const json& j) {
    std::vector<AgentId> men, women;
    for (const auto& m : j.at("men")) men.push_back(man(m.get<std::string>()));
    for (const auto& w : j.at("women")) women.push_back(woman(w.get<std::string>()));
    std::sort(men.begin(), men.end());
    std::sort(women.begin(), women.end());

    Market probe;
    probe.men = men;
    probe.women = women;
    auto resolve = [&](const std::string& name) { return resolve_name(name, probe); };

    std::map<AgentId, std::vector<PreferenceList>> sets;
    for (const auto& [name, arr] : j.at("domains").items()) {
        AgentId owner = resolve(name);
        std::vector<PreferenceList> lists;
        for (const auto& l : arr) lists.push_back(list_from_json(l, opposite(owner.side)));
        sets[owner] = std::move(lists);
    }

    std::vector<std::pair<int, std::optional<AgentId>>> node_ids;
    std::vector<std::pair<int, Matching>> leaves;
    for (const auto& nj : j.at("nodes")) {
        int id = nj.at("id").get<int>();
        if (nj.contains("actor")) {
            node_ids.emplace_back(id, resolve(nj.at("actor").get<std::string>()));
        } else {
            node_ids.emplace_back(id, std::nullopt);
            std::vector<std::pair<AgentId, AgentId>> pairs;
            for (const auto& [m, w] : nj.at("leaf").items())
                pairs.emplace_back(man(m), woman(w.get<std::string>()));
            leaves.emplace_back(id, Matching(std::move(pairs)));
        }
    }

    std::vector<std::tuple<int, int, Predicate>> edges;
    std::map<int, Side> actor_side;
    for (const auto& [id, actor] : node_ids)
        if (actor) actor_side[id] = actor->side;
    for (const auto& ej : j.at("edges")) {
        int from = ej.at("from").get<int>();
        auto side_it = actor_side.find(from);
        if (side_it == actor_side.end())
            throw std::invalid_argument("edge out of a non-internal node " + std::to_string(from));
        std::vector<PreferenceList> lists;
        for (const auto& l : ej.at("lists")) lists.push_back(list_from_json(l, opposite(side_it->second)));
        edges.emplace_back(from, ej.at("to").get<int>(), Predicate(std::move(lists)));
    }

    return MechanismTree::assemble(std::move(men), std::move(women), DomainProduct(std::move(sets)),
                                   std::move(node_ids), std::move(leaves), std::move(edges));
}

json stability_result_to_json(const StabilityResult& r) {
    json j;
    j["stable"] = r.stable;
    json ws = json::array();
    for (const auto& w : r.witnesses) {
        json wj;
        if (w.kind == BlockingWitness::Kind::Pair) {
            wj["kind"] = "blocking_pair";
            wj["man"] = w.first.name;
            wj["woman"] = w.second->name;
        } else {
            wj["kind"] = "unacceptable_partner";
            wj["agent"] = w.first.name;
        }
        ws.push_back(std::move(wj));
    }
    j["witnesses"] = std::move(ws);
    return j;
}

json cyclicity_result_to_json(const CyclicityResult& r) {
    json j;
    j["cyclical"] = r.cyclical;
    if (r.witness) {
        j["witness"] = {{"men", {r.witness->m_a.name, r.witness->m_b.name, r.witness->m_c.name}},
                        {"women", {r.witness->w_x.name, r.witness->w_y.name}}};
    }
    return j;
}

json sp_result_to_json(const StrategyProofnessResult& r) {
    json j;
    j["strategy_proof"] = r.strategy_proof;
    if (r.witness) {
        j["witness"] = {{"agent", r.witness->agent.name},
                        {"profile", profile_to_json(r.witness->truthful)},
                        {"deviation", list_to_json(r.witness->deviation)},
                        {"truthful_outcome", outcome_to_json(r.witness->truthful_outcome)},
                        {"deviating_outcome", outcome_to_json(r.witness->deviating_outcome)}};
    }
    return j;
}

json osp_result_to_json(const OspResult& r) {
    json j;
    j["osp"] = r.osp;
    if (r.witness) {
        const auto& w = *r.witness;
        j["witness"] = {{"node", w.node_id},
                        {"agent", w.agent.name},
                        {"truthful_list", list_to_json(w.truthful)},
                        {"deviating_list", list_to_json(w.deviating)},
                        {"worst_truthful_profile", profile_to_json(w.worst_truthful_profile)},
                        {"best_deviating_profile", profile_to_json(w.best_deviating_profile)},
                        {"truthful_outcome", outcome_to_json(w.truthful_outcome)},
                        {"deviating_outcome", outcome_to_json(w.deviating_outcome)}};
    }
    return j;
}

json mech_validation_to_json(const MechValidation& v) {
    json j;
    j["valid"] = v.valid;
    json arr = json::array();
    for (const auto& viol : v.violations)
        arr.push_back({{"node", viol.node_id}, {"message", viol.message}});
    j["violations"] = std::move(arr);
    return j;
}

json synthesis_outcome_to_json(const SynthesisOutcome& o) {
    json j;
    j["feasible"] = o.feasible;
    j["explored_states"] = o.explored_states;
    j["domains"] = domains_to_json(o.domains);
    j["target"] = o.target_label;
    if (o.mechanism) j["mechanism"] = mechanism_to_json(*o.mechanism);
    return j;
}

json pattern_report_to_json(const PatternReport& r) {
    json j;
    j["men"] = r.men_count;
    j["women"] = r.women_count;
    j["trials"] = r.trials;
    j["hits"] = r.hits;
    j["fraction"] = r.fraction;
    j["mode"] = r.exhaustive ? "exhaustive" : "sampled";
    if (!r.exhaustive) j["seed"] = r.seed;
    if (r.exhaustive) {
        json ws = json::array();
        for (const auto& [idx, w] : r.witnesses) {
            ws.push_back({{"profile_id", idx},
                          {"men", {w.men[0].name, w.men[1].name, w.men[2].name}},
                          {"women", {w.women[0].name, w.women[1].name, w.women[2].name}}});
        }
        j["witnesses"] = std::move(ws);
    }
    return j;
}

json two_sided_stability_to_json(const TwoSidedStabilityResult& r) {
    json j;
    j["stable"] = r.stable;
    if (r.witness) {
        json blocking = json::array();
        for (const auto& w : r.witness->blocking) {
            if (w.kind == BlockingWitness::Kind::Pair)
                blocking.push_back({{"kind", "blocking_pair"}, {"man", w.first.name},
                                    {"woman", w.second->name}});
            else
                blocking.push_back({{"kind", "unacceptable_partner"}, {"agent", w.first.name}});
        }
        j["witness"] = {{"men_profile", profile_to_json(r.witness->men_profile)},
                        {"women_profile", profile_to_json(r.witness->women_profile)},
                        {"blocking", std::move(blocking)}};
    }
    return j;
}

namespace {

std::string list_csv_label(const PreferenceList& l) {
    std::string s;
    for (const auto& a : l.ranked()) {
        if (!s.empty()) s += ">";
        s += a.name;
    }
    return s;
}

}  // namespace

std::string classify_rows_to_csv(const std::vector<ClassifyRow>& rows) {
    std::ostringstream os;
    os << "profile_id,q_x,q_y,q_z,verdict,states_explored\n";
    for (const auto& r : rows) {
        os << r.profile_id << "," << list_csv_label(r.q.at(woman("x"))) << ","
           << list_csv_label(r.q.at(woman("y"))) << "," << list_csv_label(r.q.at(woman("z")))
           << "," << (r.implementable ? "implementable" : "notImplementable") << ","
           << r.states_explored << "\n";
    }
    return os.str();
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
    out << text;
}

}  // namespace ospmatch
