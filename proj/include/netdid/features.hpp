#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netdid/graph.hpp"

namespace netdid {

struct FeatureMatrix {
  Eigen::MatrixXd F;  // n x q, column 0 is the intercept
  std::vector<std::string> names;
};

// Base columns, in order: own covariates x_1..x_p, neighbor means of each
// covariate, degree, then for s = 2..L the mean of each covariate over the
// nodes at exact distance s (zero when that boundary is empty). The design is
// the intercept, the base columns, then for poly_degree >= 2 every product of
// two base columns (a <= b, lexicographic), then for poly_degree 3 every
// product of three (a <= b <= c).
FeatureMatrix build_features(const Graph& g, const Eigen::MatrixXd& X, int L, int poly_degree);

// Same polynomial layout over the own covariates only.
FeatureMatrix build_covariate_features(const Eigen::MatrixXd& X, int poly_degree);

// Polynomial expansion of an arbitrary base block.
FeatureMatrix polynomial_design(const Eigen::MatrixXd& base, const std::vector<std::string>& base_names,
                                int poly_degree);

std::size_t feature_count(int p, int L, int poly_degree);

}  // namespace netdid
