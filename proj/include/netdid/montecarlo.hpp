#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdid/estimators.hpp"
#include "netdid/nuisance.hpp"
#include "netdid/simulate.hpp"

namespace netdid {

// Target of one Monte Carlo method.
enum class McEstimand { DattOverall, DattLevel, Satt0, Att, Naive };

// Where the nuisances come from. The non-learner sources need the
// treatment-spillover design, whose true nuisances are known: Oracle uses
// them all, WrongP replaces the propensities by intercept-only fits, WrongMu
// replaces the outcome regression, WrongBoth replaces both.
enum class NuisanceSource { Learner, Oracle, WrongP, WrongMu, WrongBoth };

McEstimand parse_mc_estimand(const std::string& s);
std::string to_string(McEstimand e);
NuisanceSource parse_nuisance_source(const std::string& s);
std::string to_string(NuisanceSource s);

struct McMethod {
  std::string name;
  McEstimand estimand = McEstimand::DattOverall;
  int g = 1;  // level for DattLevel
  NuisanceSource source = NuisanceSource::Learner;
  LearnerConfig learner;
};

struct McConfig {
  DgpConfig dgp;
  std::vector<McMethod> methods;
  int reps = 100;
  std::uint64_t base_seed = 1;
  int jobs = 1;
  double eps_trim = 0.0;
  InferenceConfig inference;  // inference.jobs is ignored; replications run in parallel

  void validate() const;
};

struct McRow {
  int rep = 0;
  std::uint64_t seed = 0;
  std::string method;
  bool ok = false;
  std::string error;
  double estimate = 0.0;
  double truth = 0.0;
  double se_hac = 0.0;  // NaN when the HAC variance is negative
  double se_iid = 0.0;
  bool hac_negative = false;
  bool cover_hac = false;
  bool cover_iid = false;
  int m = 0;
  int bandwidth = 0;
  int treated = 0;
  int trimmed = 0;
  int clipped = 0;
};

struct McAggregate {
  std::string method;
  int reps = 0;
  int successes = 0;
  int failures = 0;
  double mean = 0.0;
  double mean_truth = 0.0;
  double bias = 0.0;   // mean of estimate - truth
  double sd = 0.0;     // sample standard deviation of the estimates
  double mc_se = 0.0;  // sd / sqrt(successes)
  double rmse = 0.0;
  double mean_se_hac = 0.0;  // over replications with a nonnegative HAC variance
  double mean_se_iid = 0.0;
  double coverage_hac = 0.0;  // over replications with a nonnegative HAC variance
  double coverage_iid = 0.0;
  int hac_negative = 0;
  double mean_treated = 0.0;
  double mean_bandwidth = 0.0;
};

struct McReport {
  McConfig config;
  std::vector<McRow> rows;  // rep-major, methods in configured order
  std::vector<McAggregate> aggregates;
};

// Replication r simulates with seed base_seed + r. Failed replications are
// recorded and excluded from the aggregates. Throws EstimationError when
// every replication of every method failed.
McReport run_monte_carlo(const McConfig& cfg);

McAggregate aggregate_rows(const std::string& method, const std::vector<McRow>& rows);

// One replication of every method on an already simulated panel.
std::vector<McRow> evaluate_methods(const SimulatedPanel& sp, const McConfig& cfg, int rep);

}  // namespace netdid
