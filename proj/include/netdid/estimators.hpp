#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netdid/dataset.hpp"
#include "netdid/exposure.hpp"
#include "netdid/nuisance.hpp"
#include "netdid/variance.hpp"

namespace netdid {

// Linearized unit scores over the analysis set; their mean is the estimate.
struct ScoreVector {
  int g = -1;
  NodeSet members;
  std::vector<double> scores;  // scores[k] belongs to members.nodes()[k]
};

struct PointEstimate {
  double estimate = 0.0;
  ScoreVector scores;
  int clipped = 0;
};

struct EstimateReport {
  std::string estimand;
  double estimate = 0.0;
  double se_hac = 0.0;  // NaN when the HAC variance is negative
  double se_iid = 0.0;
  double var_hac = 0.0;
  double var_iid = 0.0;
  bool hac_negative = false;
  std::uint64_t hac_pairs = 0;
  int bandwidth = 0;
  double gamma = 1.0;
  double level = 0.95;
  std::optional<Interval> ci;  // HAC interval; empty when var_hac < 0
  Interval ci_iid;
  int m = 0;
  int trimmed = 0;
  int clipped = 0;
  ScoreVector scores;
};

struct InferenceConfig {
  double gamma = 1.0;
  std::optional<int> bandwidth;  // overrides the data-driven rule
  double level = 0.95;
  int jobs = 1;
};

// HAC and i.i.d. inference for a point estimate. `bw` is the precomputed
// bandwidth for the graph.
EstimateReport make_report(const std::string& estimand, const PointEstimate& pe, const Graph& g, int bw,
                           const InferenceConfig& inf, int trimmed);

double dr_score(int i, std::span<const int> D, std::span<const int> G, const Eigen::VectorXd& dy,
                const NuisanceFit& fit, int g);

struct TrimResult {
  NodeSet kept;
  int trimmed = 0;
};

// Units whose unclipped cell propensity lies in (eps_trim, 1 - eps_trim).
// eps_trim <= 0 keeps everyone. Throws EstimationError when nothing is kept.
TrimResult trim_analysis_set(const NuisanceFit& fit, double eps_trim);
// Intersection of the trimmed sets of all fits.
TrimResult trim_analysis_set(std::span<const NuisanceFit* const> fits, double eps_trim);

using LevelFits = std::map<int, NuisanceFit>;

PointEstimate datt_hat(const PanelDataset& d, const ExposureVector& G, int g, const NuisanceFit& fit,
                       const NodeSet& members);
// Level estimates weighted by the share of each level among treated units.
PointEstimate datt_overall(const PanelDataset& d, const ExposureVector& G, const LevelFits& fits,
                           const NodeSet& members);
// Spillover of level g versus 0 among units with own treatment `recipient`.
// Needs fits at g and 0; recipient 1 requires fits[0].mu1.
PointEstimate satt_hat(const PanelDataset& d, const ExposureVector& G, int g, int recipient, const LevelFits& fits,
                       const NodeSet& members);
// Level-specific spillovers weighted by the share of each level among
// treated units.
PointEstimate satt_overall(const PanelDataset& d, const ExposureVector& G, int recipient, const LevelFits& fits,
                           const NodeSet& members);

struct AttDecomposition {
  PointEstimate datt;
  PointEstimate satt0;
  PointEstimate att;  // estimate = datt + satt0, scores added unit by unit
};

AttDecomposition att_total(const PanelDataset& d, const ExposureVector& G, const LevelFits& fits,
                           const NodeSet& members);

PointEstimate rcs_datt_hat(const RcsDataset& d, const ExposureVector& G, int g, const RcsNuisanceFit& fit,
                           const NodeSet& members);

// Interference-blind doubly robust DID: every unit at one exposure level,
// nuisances on own covariates only (polynomial of degree cfg.poly_degree,
// logistic and least-squares fits).
struct NaiveResult {
  PointEstimate estimate;
  NuisanceFit fit;
};
NaiveResult naive_dr_did(const PanelDataset& d, const LearnerConfig& cfg);

struct StaggeredMatchEntry {
  int unit = 0;
  int exposure = 0;
  std::vector<int> matches;
};

struct StaggeredMatch {
  int t = 0;
  std::vector<StaggeredMatchEntry> entries;
  std::vector<int> unmatched;  // adopters with no comparison unit
};

// For every unit adopting at t, the units not yet treated at t with the same
// exposure level, exposures computed from adoption status at t.
StaggeredMatch staggered_match(const StaggeredPanel& sp, int t, const ExposureMap& map);

// Two-period sub-panel (periods t-1, t) over adopters at t and their matches,
// on the induced subgraph. Requires t >= 2.
PanelDataset matched_subpanel(const StaggeredPanel& sp, const StaggeredMatch& match);

}  // namespace netdid
