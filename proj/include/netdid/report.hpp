#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "netdid/estimators.hpp"
#include "netdid/graph.hpp"
#include "netdid/montecarlo.hpp"
#include "netdid/nuisance.hpp"
#include "netdid/simulate.hpp"
#include "netdid/variance.hpp"

namespace netdid {

using Json = nlohmann::json;

// Config readers start from `base` and overwrite the keys present; unknown
// keys and wrongly typed values throw std::invalid_argument.
// "exposure" value: a kind string, or an object {"kind": ..., "cap": ...}.
ExposureMap exposure_from_json(const Json& v, ExposureMap base = {});
Json to_json(const LearnerConfig& c);
LearnerConfig learner_from_json(const Json& j, LearnerConfig base = {});
Json to_json(const DgpConfig& c);
DgpConfig dgp_from_json(const Json& j, DgpConfig base = {});
Json to_json(const McMethod& m);
McMethod method_from_json(const Json& j, const LearnerConfig& default_learner);
Json to_json(const McConfig& c);
McConfig mc_from_json(const Json& j, McConfig base = {});

// Non-finite doubles become null.
Json to_json(const EstimateReport& r, bool include_scores = false);
Json to_json(const McRow& r);
Json to_json(const McAggregate& a);
Json to_json(const McReport& r, bool include_rows = true);
Json to_json(const GraphStats& s);
Json to_json(const BandwidthChoice& b);
Json to_json(const PotentialOutcomeTruth& t);

// Unit scores: id,node,score.
void write_scores_csv(std::ostream& os, const EstimateReport& r, const std::vector<std::string>& ids);
// One line per replication and method.
void write_mc_rows_csv(std::ostream& os, const McReport& r);
// Whitespace-separated aggregate table with a commented header, readable by gnuplot.
void write_mc_summary_table(std::ostream& os, const McReport& r);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace netdid
