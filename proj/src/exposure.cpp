#include "netdid/exposure.hpp"

#include <algorithm>
#include <stdexcept>

namespace netdid {

int exposure_count(const Graph& g, std::span<const int> D, int i) {
  int c = 0;
  for (int j : g.neighbors(i)) c += D[j];
  return c;
}

int exposure_any(const Graph& g, std::span<const int> D, int i) {
  for (int j : g.neighbors(i))
    if (D[j]) return 1;
  return 0;
}

int ExposureMap::level(const Graph& g, std::span<const int> D, int i) const {
  if (kind == ExposureKind::Any) return exposure_any(g, D, i);
  return std::min(exposure_count(g, D, i), cap);
}

std::vector<int> ExposureMap::levels() const {
  const int top = kind == ExposureKind::Any ? 1 : cap;
  std::vector<int> out(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) out[k] = k;
  return out;
}

ExposureKind parse_exposure_kind(const std::string& s) {
  if (s == "any") return ExposureKind::Any;
  if (s == "count") return ExposureKind::Count;
  throw std::invalid_argument("unknown exposure kind '" + s + "' (expected any|count)");
}

std::string to_string(ExposureKind k) { return k == ExposureKind::Any ? "any" : "count"; }

ExposureVector compute_exposure(const Graph& g, std::span<const int> D, const ExposureMap& map) {
  if (static_cast<int>(D.size()) != g.num_nodes()) throw std::invalid_argument("compute_exposure: D length mismatch");
  if (map.kind == ExposureKind::Count && map.cap < 1) throw std::invalid_argument("exposure cap must be >= 1");
  ExposureVector e;
  e.levels = map.levels();
  e.G.resize(D.size());
  for (int i = 0; i < g.num_nodes(); ++i) e.G[i] = map.level(g, D, i);
  return e;
}

Eigen::VectorXd neighbor_mean_covariates(const Graph& g, const Eigen::MatrixXd& X, int i) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(X.cols());
  const auto nb = g.neighbors(i);
  if (nb.empty()) return m;
  for (int j : nb) m += X.row(j).transpose();
  return m / static_cast<double>(nb.size());
}

Eigen::MatrixXd neighbor_means(const Graph& g, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd M(X.rows(), X.cols());
  for (int i = 0; i < g.num_nodes(); ++i) M.row(i) = neighbor_mean_covariates(g, X, i).transpose();
  return M;
}

int isolated_count(const Graph& g) {
  int c = 0;
  for (int i = 0; i < g.num_nodes(); ++i) c += g.degree(i) == 0;
  return c;
}

}  // namespace netdid
