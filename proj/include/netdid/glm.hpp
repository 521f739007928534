#pragma once

#include <Eigen/Dense>
#include <span>

#include "netdid/graph.hpp"

namespace netdid {

enum class Link { Logit, Identity };

struct GlmOptions {
  double ridge = 1e-6;  // applied to every coefficient except the intercept (column 0)
  int max_iter = 200;
  double tol = 1e-8;  // infinity norm of the gradient of the summed objective
};

struct GlmFit {
  Eigen::VectorXd weights;
  Link link = Link::Identity;
  int iterations = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
  bool converged = false;

  [[nodiscard]] Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& F) const { return F * weights; }
  // Probabilities for Logit, fitted values for Identity.
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& F) const;
};

double sigmoid(double eta);
// log(1 + e^eta) without overflow.
double log1pexp(double eta);

// Summed logistic loss over `mask` plus ridge/2 * sum_{k>=1} w_k^2.
double logistic_objective(const Eigen::MatrixXd& F, std::span<const int> labels, const NodeSet& mask,
                          const Eigen::VectorXd& w, double ridge);

// Newton's method with step halving. Throws EstimationError when the masked
// labels are all equal or the mask is empty.
GlmFit fit_logistic(const Eigen::MatrixXd& F, std::span<const int> labels, const NodeSet& mask,
                    const GlmOptions& opt = {});

// Ridge least squares via the normal equations. Throws EstimationError on a
// singular system (only possible with ridge = 0).
GlmFit fit_least_squares(const Eigen::MatrixXd& F, const Eigen::VectorXd& y, const NodeSet& mask,
                         const GlmOptions& opt = {});

}  // namespace netdid
