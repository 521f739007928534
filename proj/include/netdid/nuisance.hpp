#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdid/dataset.hpp"
#include "netdid/exposure.hpp"
#include "netdid/features.hpp"
#include "netdid/gnn.hpp"

namespace netdid {

enum class LearnerKind { Nglm, Gnn };

LearnerKind parse_learner(const std::string& s);
std::string to_string(LearnerKind k);

struct LearnerConfig {
  LearnerKind learner = LearnerKind::Nglm;
  int L = 1;
  int H = 5;
  int poly_degree = 2;
  int epochs = 300;
  double lr = 0.02;
  std::uint64_t seed = 1;
  double eps_clip = 0.01;
  double ridge = 1e-6;
  Aggregation aggregation = Aggregation::Pna;
  Optimizer optimizer = Optimizer::Adam;

  void validate() const;
};

// Fits propensity and outcome heads for one dataset with one learner. NGLM
// features are built once and shared across heads.
class NuisanceLearner {
 public:
  NuisanceLearner(const Graph& g, const Eigen::MatrixXd& X, const LearnerConfig& cfg);
  // NGLM on a caller-supplied design.
  NuisanceLearner(const Graph& g, const Eigen::MatrixXd& X, const LearnerConfig& cfg, FeatureMatrix features);

  // P(label = 1 | X, A) for every node, fit on `mask`. `head` selects an
  // independent initialization stream for the GNN.
  [[nodiscard]] Eigen::VectorXd fit_probability(const std::vector<int>& labels, const NodeSet& mask, int head) const;
  // E[target | X, A] for every node, fit on `mask`.
  [[nodiscard]] Eigen::VectorXd fit_mean(const Eigen::VectorXd& targets, const NodeSet& mask, int head) const;

  [[nodiscard]] const LearnerConfig& config() const { return cfg_; }
  [[nodiscard]] int glm_nonconverged() const { return glm_nonconverged_; }

 private:
  const Graph& g_;
  const Eigen::MatrixXd& X_;
  LearnerConfig cfg_;
  FeatureMatrix features_;
  mutable int glm_nonconverged_ = 0;
};

// Nuisance predictions at one exposure level g.
struct NuisanceFit {
  int g = 0;
  Eigen::VectorXd p1;      // generalized propensity P(D=1, G=g | X, A)
  Eigen::VectorXd p0;      // generalized propensity P(D=0, G=g | X, A)
  Eigen::VectorXd pi_raw;  // P(D=1 | G=g, X, A) = p1 / (p1 + p0), unclipped
  Eigen::VectorXd pi;      // pi_raw clipped to [eps, 1 - eps]
  Eigen::VectorXd mu0;     // outcome-change regression among controls at g
  std::optional<Eigen::VectorXd> mu1;  // same among treated at g, when requested
  double eps_clip = 0.01;
  int clipped_low = 0;
  int clipped_high = 0;
  int glm_nonconverged = 0;
};

// Recomputes pi_raw, pi and the clip counts from p1 and p0.
void finalize_propensity(NuisanceFit& fit, double eps_clip);

// Builds a fit from externally supplied predictions (oracle or deliberately
// misspecified nuisances).
NuisanceFit make_fit(int g, Eigen::VectorXd p1, Eigen::VectorXd p0, Eigen::VectorXd mu0, double eps_clip,
                     std::optional<Eigen::VectorXd> mu1 = std::nullopt);

// Propensity heads on all units (targets 1{D=d, G=g}); outcome head on
// controls with G = g targeting delta Y, plus treated with G = g when
// with_mu1. Throws OverlapError naming the empty (d, g) cell.
NuisanceFit fit_nuisances(const PanelDataset& d, const ExposureVector& G, int g, const LearnerConfig& cfg,
                          bool with_mu1 = false);
NuisanceFit fit_nuisances(const PanelDataset& d, const ExposureVector& G, int g, const NuisanceLearner& learner,
                          bool with_mu1 = false);

// Repeated cross-section nuisances: pooled propensity heads and per-wave
// outcome levels among controls at g.
struct RcsNuisanceFit {
  NuisanceFit base;        // p1, p0, pi; base.mu0 unused
  Eigen::VectorXd mu_pre;  // E[Y | T=0, D=0, G=g, X, A]
  Eigen::VectorXd mu_post; // E[Y | T=1, D=0, G=g, X, A]
};

RcsNuisanceFit fit_rcs_nuisances(const RcsDataset& d, const ExposureVector& G, int g, const LearnerConfig& cfg);

NodeSet cell_members(std::span<const int> D, std::span<const int> G, int d, int g);

}  // namespace netdid
