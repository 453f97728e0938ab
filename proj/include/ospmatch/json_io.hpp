#pragma once

#include <string>

#include <json.hpp>

#include "ospmatch/experiments.hpp"
#include "ospmatch/mechanism.hpp"
#include "ospmatch/osp.hpp"
#include "ospmatch/stable.hpp"
#include "ospmatch/synthesis.hpp"
#include "ospmatch/two_sided.hpp"

namespace ospmatch {

using json = nlohmann::json;

// market: {"men":[...], "women":[...], "women_prefs":{...}, "men_prefs":{...}?}
json market_to_json(const Market& market);
Market market_from_json(const json& j);

// Lists are arrays of names, most preferred first; {"a":["y","x"], ...}.
// Owner sides are resolved against the market.
json profile_to_json(const Profile& p);
Profile profile_from_json(const json& j, const Market& market);

// {"a":"x", ...}; unmatched agents are omitted.
json matching_to_json(const Matching& mu);
Matching matching_from_json(const json& j, const Market& market);

// {"a":[["z","y","x"],["y","x","z"]], ...}
json domains_to_json(const DomainProduct& d);
DomainProduct domains_from_json(const json& j, const Market& market);

// {"men":[...], "women":[...], "domains":{...}, "nodes":[...], "edges":[...]}
// nodes: {"id":n, "actor":"a"} or {"id":n, "leaf":{"a":"x",...}};
// edges: {"from":n, "to":n, "lists":[[...],...]}.
json mechanism_to_json(const MechanismTree& mech);
MechanismTree mechanism_from_json(const json& j);

json stability_result_to_json(const StabilityResult& r);
json cyclicity_result_to_json(const CyclicityResult& r);
json sp_result_to_json(const StrategyProofnessResult& r);
json osp_result_to_json(const OspResult& r);
json mech_validation_to_json(const MechValidation& v);
json synthesis_outcome_to_json(const SynthesisOutcome& o);
json pattern_report_to_json(const PatternReport& r);
json two_sided_stability_to_json(const TwoSidedStabilityResult& r);

// CSV with header profile_id,q_x,q_y,q_z,verdict,states_explored.
std::string classify_rows_to_csv(const std::vector<ClassifyRow>& rows);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ospmatch
