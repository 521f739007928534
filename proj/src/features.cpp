#include "netdid/features.hpp"

#include <stdexcept>

#include "netdid/exposure.hpp"

namespace netdid {

namespace {

std::size_t choose(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::size_t feature_count(int p, int L, int poly_degree) {
  const auto b = static_cast<std::size_t>(p) * (1 + L) + 1;
  std::size_t q = 1 + b;
  if (poly_degree >= 2) q += choose(b + 1, 2);
  if (poly_degree >= 3) q += choose(b + 2, 3);
  return q;
}

FeatureMatrix polynomial_design(const Eigen::MatrixXd& base, const std::vector<std::string>& base_names,
                                int poly_degree) {
  if (poly_degree < 1 || poly_degree > 3) throw std::invalid_argument("poly_degree must be 1, 2 or 3");
  const Eigen::Index n = base.rows();
  const Eigen::Index b = base.cols();
  std::vector<Eigen::VectorXd> cols;
  FeatureMatrix out;
  cols.push_back(Eigen::VectorXd::Ones(n));
  out.names.push_back("1");
  for (Eigen::Index a = 0; a < b; ++a) {
    cols.push_back(base.col(a));
    out.names.push_back(base_names[a]);
  }
  if (poly_degree >= 2) {
    for (Eigen::Index a = 0; a < b; ++a)
      for (Eigen::Index c = a; c < b; ++c) {
        cols.push_back(base.col(a).cwiseProduct(base.col(c)));
        out.names.push_back(base_names[a] + "*" + base_names[c]);
      }
  }
  if (poly_degree >= 3) {
    for (Eigen::Index a = 0; a < b; ++a)
      for (Eigen::Index c = a; c < b; ++c)
        for (Eigen::Index e = c; e < b; ++e) {
          cols.push_back(base.col(a).cwiseProduct(base.col(c)).cwiseProduct(base.col(e)));
          out.names.push_back(base_names[a] + "*" + base_names[c] + "*" + base_names[e]);
        }
  }
  out.F.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.F.col(static_cast<Eigen::Index>(k)) = cols[k];
  return out;
}

FeatureMatrix build_features(const Graph& g, const Eigen::MatrixXd& X, int L, int poly_degree) {
  if (L < 1) throw std::invalid_argument("build_features: L must be >= 1");
  if (X.rows() != g.num_nodes()) throw std::invalid_argument("build_features: X rows do not match graph");
  const int n = g.num_nodes();
  const auto p = X.cols();
  Eigen::MatrixXd base(n, p * (1 + L) + 1);
  std::vector<std::string> names;
  base.leftCols(p) = X;
  base.middleCols(p, p) = neighbor_means(g, X);
  base.col(2 * p) = Eigen::Map<const Eigen::VectorXi>(g.degrees().data(), n).cast<double>();
  for (Eigen::Index k = 0; k < p; ++k) names.push_back("x" + std::to_string(k + 1));
  for (Eigen::Index k = 0; k < p; ++k) names.push_back("nbr1_x" + std::to_string(k + 1));
  names.push_back("degree");
  if (L >= 2) {
    Eigen::MatrixXd ring = Eigen::MatrixXd::Zero(n, p * (L - 1));
    std::vector<int> counts(static_cast<std::size_t>(L) + 1);
    BfsWorkspace ws(n);
    for (int i = 0; i < n; ++i) {
      std::fill(counts.begin(), counts.end(), 0);
      ws.run(g, i, L, [&](int v, int d) {
        if (d < 2) return;
        ring.block(i, (d - 2) * p, 1, p) += X.row(v);
        ++counts[d];
      });
      for (int s = 2; s <= L; ++s)
        if (counts[s] > 0) ring.block(i, (s - 2) * p, 1, p) /= counts[s];
    }
    base.rightCols(p * (L - 1)) = ring;
    for (int s = 2; s <= L; ++s)
      for (Eigen::Index k = 0; k < p; ++k) names.push_back("nbr" + std::to_string(s) + "_x" + std::to_string(k + 1));
  }
  return polynomial_design(base, names, poly_degree);
}

FeatureMatrix build_covariate_features(const Eigen::MatrixXd& X, int poly_degree) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < X.cols(); ++k) names.push_back("x" + std::to_string(k + 1));
  return polynomial_design(X, names, poly_degree);
}

}  // namespace netdid
