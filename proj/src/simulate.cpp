#include "netdid/simulate.hpp"

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "netdid/errors.hpp"
#include "netdid/glm.hpp"

namespace netdid {

DgpKind parse_dgp(const std::string& s) {
  if (s == "main-s6") return DgpKind::MainS6;
  if (s == "appendix-e") return DgpKind::AppendixE;
  throw std::invalid_argument("unknown dgp '" + s + "' (expected main-s6|appendix-e)");
}

std::string to_string(DgpKind k) { return k == DgpKind::MainS6 ? "main-s6" : "appendix-e"; }

PeerOutcome parse_peer_outcome(const std::string& s) {
  if (s == "simultaneous") return PeerOutcome::Simultaneous;
  if (s == "lagged") return PeerOutcome::Lagged;
  throw std::invalid_argument("unknown peer_outcome '" + s + "' (expected simultaneous|lagged)");
}

std::string to_string(PeerOutcome p) { return p == PeerOutcome::Simultaneous ? "simultaneous" : "lagged"; }

void DgpConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("dgp config: " + m); };
  if (n < 50) fail("n must be at least 50");
  if (radius && !(*radius > 0)) fail("radius must be positive");
  if (!std::isfinite(treat_peer) || !std::isfinite(outcome_peer) || !std::isfinite(outcome_x_peer)) {
    fail("coefficients must be finite");
  }
  if (!(std::abs(outcome_peer) < 1)) fail("|outcome_peer| must be < 1");
  for (double v : theta_d)
    if (!std::isfinite(v)) fail("theta_d must be finite");
  for (int k = 0; k < 4; ++k)
    if (!std::isfinite(theta_pre[k]) || !std::isfinite(theta_post[k])) fail("outcome coefficients must be finite");
  if (max_iter < 1 || !(tol > 0)) fail("solver settings must be positive");
  if (exposure.kind == ExposureKind::Count && exposure.cap < 1) fail("exposure cap must be >= 1");
}

double SimulatedPanel::y_post(int i, int d, int g) const {
  const int levels = static_cast<int>(G.levels.size());
  return y_post_cf(i, d * levels + g);
}

double SimulatedPanel::y_pre(int i, int d, int g) const {
  const int levels = static_cast<int>(G.levels.size());
  return y_pre_cf(i, d * levels + g);
}

Eigen::VectorXd neighbor_mean(const Graph& g, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    double s = 0;
    for (int j : nb) s += v[j];
    out[i] = s / static_cast<double>(nb.size());
  }
  return out;
}

FixedPointResult solve_treatment_fixed_point(const Graph& g, const Eigen::VectorXd& index, double peer, int max_iter) {
  const int n = g.num_nodes();
  if (index.size() != n) throw std::invalid_argument("solve_treatment_fixed_point: index length mismatch");
  FixedPointResult r;
  std::vector<int> D(n, 0), next(n);
  Eigen::VectorXd Dv = Eigen::VectorXd::Zero(n);
  std::vector<int> best = D;
  int best_flips = n + 1;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    const Eigen::VectorXd wd = neighbor_mean(g, Dv);
    int flips = 0;
    for (int i = 0; i < n; ++i) {
      next[i] = index[i] + peer * wd[i] > 0 ? 1 : 0;
      flips += next[i] != D[i];
    }
    if (flips < best_flips) {
      best_flips = flips;
      best = D;
    }
    if (flips == 0) {
      r.converged = true;
      r.D = std::move(D);
      return r;
    }
    D.swap(next);
    for (int i = 0; i < n; ++i) Dv[i] = D[i];
  }
  r.iterations = max_iter;
  r.D = std::move(best);
  r.residual_flips = best_flips;
  return r;
}

LinearSolveResult solve_linear_in_means(const Graph& g, const Eigen::VectorXd& rhs, double beta, double tol,
                                        int max_iter) {
  if (!(std::abs(beta) < 1)) throw std::invalid_argument("solve_linear_in_means: |beta| must be < 1");
  if (rhs.size() != g.num_nodes()) throw std::invalid_argument("solve_linear_in_means: rhs length mismatch");
  LinearSolveResult r;
  r.y = rhs;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    const Eigen::VectorXd resid = r.y - beta * neighbor_mean(g, r.y) - rhs;
    r.residual = resid.cwiseAbs().maxCoeff();
    if (r.residual <= tol) return r;
    r.y -= resid;  // y <- rhs + beta W y
  }
  const Eigen::VectorXd resid = r.y - beta * neighbor_mean(g, r.y) - rhs;
  r.residual = resid.cwiseAbs().maxCoeff();
  if (r.residual > tol) {
    throw EstimationError("linear-in-means solve did not converge: residual " + std::to_string(r.residual) +
                          " after " + std::to_string(max_iter) + " iterations");
  }
  return r;
}

namespace {

Graph simulate_graph(const DgpConfig& cfg, std::mt19937_64& rng) {
  const auto pts = sample_positions(cfg.n, rng());
  return rgg_from_positions(pts, cfg.radius.value_or(default_rgg_radius(cfg.n)));
}

Eigen::VectorXd normals(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

void fill_ids(PanelDataset& d) {
  d.ids.resize(d.n());
  for (int i = 0; i < d.n(); ++i) d.ids[i] = std::to_string(i);
}

}  // namespace

SimulatedPanel simulate_main_s6(const DgpConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SimulatedPanel sp;
  auto& d = sp.data;
  d.graph = simulate_graph(cfg, rng);
  const int n = cfg.n;
  std::uniform_int_distribution<int> level(0, 4);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 0.25 * level(rng);
  const Eigen::VectorXd eps = normals(rng, n);
  const Eigen::VectorXd nu = normals(rng, n);
  const Eigen::VectorXd mu = normals(rng, n);
  const Graph& g = d.graph;
  const Eigen::VectorXd wx = neighbor_mean(g, x);

  d.y_pre = (0.5 + wx.array() + x.array() + eps.array() + neighbor_mean(g, eps).array()).matrix();
  const Eigen::VectorXd index = (0.5 + wx.array() - x.array() + nu.array() + neighbor_mean(g, nu).array()).matrix();
  auto fp = solve_treatment_fixed_point(g, index, cfg.treat_peer, cfg.max_iter);
  sp.treatment_iterations = fp.iterations;
  sp.treatment_converged = fp.converged;
  d.D = std::move(fp.D);

  const Eigen::VectorXd rest =
      (0.5 + cfg.outcome_x_peer * wx.array() + x.array() + mu.array() + neighbor_mean(g, mu).array()).matrix();
  if (cfg.peer_outcome == PeerOutcome::Simultaneous) {
    const auto sol = solve_linear_in_means(g, rest, cfg.outcome_peer, cfg.tol, cfg.max_iter);
    d.y_post = sol.y;
    sp.outcome_iterations = sol.iterations;
    sp.outcome_residual = sol.residual;
  } else {
    d.y_post = rest + cfg.outcome_peer * neighbor_mean(g, d.y_pre);
  }
  d.X = x;
  d.covariate_names = {"x1"};
  fill_ids(d);
  d.validate();

  sp.G = compute_exposure(g, d.D, cfg.exposure);
  // Neither outcome equation involves any treatment, so every potential
  // outcome equals the realized one.
  const auto cols = static_cast<Eigen::Index>(2 * sp.G.levels.size());
  sp.y_pre_cf = d.y_pre.replicate(1, cols);
  sp.y_post_cf = d.y_post.replicate(1, cols);
  return sp;
}

SimulatedPanel simulate_appendix_e(const DgpConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SimulatedPanel sp;
  auto& d = sp.data;
  d.graph = simulate_graph(cfg, rng);
  const int n = cfg.n;
  const Eigen::VectorXd x1 = normals(rng, n);
  const Eigen::VectorXd x2 = normals(rng, n);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + x2[i] / (1.0 + std::exp(x1[i]));
  const Eigen::VectorXd nu = normals(rng, n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  d.D.resize(n);
  for (int i = 0; i < n; ++i) {
    const double p = sigmoid(cfg.theta_d[0] + cfg.theta_d[1] * x[i] + nu[i]);
    d.D[i] = unif(rng) < p ? 1 : 0;
  }
  const Eigen::VectorXd eps = normals(rng, n);
  const Eigen::VectorXd mu = normals(rng, n);
  sp.G = compute_exposure(d.graph, d.D, cfg.exposure);
  const int levels = static_cast<int>(sp.G.levels.size());
  sp.y_pre_cf.resize(n, 2 * levels);
  sp.y_post_cf.resize(n, 2 * levels);
  // The spillover interaction uses the indicator of any treated neighbor,
  // whatever exposure map is used for estimation.
  for (int i = 0; i < n; ++i)
    for (int dd = 0; dd < 2; ++dd)
      for (int k = 0; k < levels; ++k) {
        const double any = sp.G.levels[k] > 0 ? 1.0 : 0.0;
        const auto& a = cfg.theta_pre;
        const auto& b = cfg.theta_post;
        sp.y_pre_cf(i, dd * levels + k) = a[0] + a[1] * dd + a[2] * dd * any + a[3] * x[i] + eps[i];
        sp.y_post_cf(i, dd * levels + k) = b[0] + b[1] * dd + b[2] * dd * any + b[3] * x[i] + mu[i];
      }
  d.y_pre.resize(n);
  d.y_post.resize(n);
  for (int i = 0; i < n; ++i) {
    d.y_pre[i] = sp.y_pre(i, d.D[i], sp.G.G[i]);
    d.y_post[i] = sp.y_post(i, d.D[i], sp.G.G[i]);
  }
  d.X = x;
  d.covariate_names = {"x1"};
  fill_ids(d);
  d.validate();
  return sp;
}

SimulatedPanel simulate(const DgpConfig& cfg) {
  return cfg.kind == DgpKind::MainS6 ? simulate_main_s6(cfg) : simulate_appendix_e(cfg);
}

PotentialOutcomeTruth potential_outcome_effects(const SimulatedPanel& sp) {
  PotentialOutcomeTruth t;
  const auto& d = sp.data;
  std::map<int, double> sum_direct, sum_sp1;
  std::map<int, int> count;
  double direct = 0, satt0 = 0, att = 0;
  for (int i = 0; i < d.n(); ++i) {
    if (d.D[i] != 1) continue;
    const int g = sp.G.G[i];
    const double e = sp.y_post(i, 1, g) - sp.y_post(i, 0, g);
    sum_direct[g] += e;
    sum_sp1[g] += sp.y_post(i, 1, g) - sp.y_post(i, 1, 0);
    ++count[g];
    direct += e;
    satt0 += sp.y_post(i, 0, g) - sp.y_post(i, 0, 0);
    att += sp.y_post(i, 1, g) - sp.y_post(i, 0, 0);
    ++t.treated;
  }
  for (const auto& [g, c] : count) {
    t.datt[g] = sum_direct[g] / c;
    t.satt1[g] = sum_sp1[g] / c;
  }
  if (t.treated > 0) {
    t.datt_overall = direct / t.treated;
    t.satt0 = satt0 / t.treated;
    t.att = att / t.treated;
  }
  return t;
}

double potential_outcome_att(const DgpConfig& cfg, int reps) {
  if (reps < 1) throw std::invalid_argument("potential_outcome_att: reps must be >= 1");
  double s = 0;
  for (int r = 0; r < reps; ++r) {
    DgpConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    s += potential_outcome_effects(simulate(c)).att;
  }
  return s / reps;
}

double logistic_normal_mean(double a) {
  thread_local boost::math::quadrature::sinh_sinh<double> integrator;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double v) { return sigmoid(a + v) * norm * std::exp(-0.5 * v * v); };
  return integrator.integrate(f);
}

AppendixETruth appendix_e_truth(const SimulatedPanel& sp, const DgpConfig& cfg, int g) {
  if (cfg.exposure.kind != ExposureKind::Any) throw std::invalid_argument("appendix_e_truth: needs the ANY exposure");
  if (g != 0 && g != 1) throw std::invalid_argument("appendix_e_truth: level must be 0 or 1");
  const auto& d = sp.data;
  const int n = d.n();
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) e[i] = logistic_normal_mean(cfg.theta_d[0] + cfg.theta_d[1] * d.X(i, 0));
  AppendixETruth t;
  t.p1.resize(n);
  t.p0.resize(n);
  t.mu0.resize(n);
  t.mu1.resize(n);
  const auto& a = cfg.theta_pre;
  const auto& b = cfg.theta_post;
  for (int i = 0; i < n; ++i) {
    double none = 1.0;
    for (int j : d.graph.neighbors(i)) none *= 1.0 - e[j];
    const double pg = g == 1 ? 1.0 - none : none;
    t.p1[i] = e[i] * pg;
    t.p0[i] = (1.0 - e[i]) * pg;
    const double x = d.X(i, 0);
    t.mu0[i] = (b[0] + b[3] * x) - (a[0] + a[3] * x);
    t.mu1[i] = (b[0] + b[1] + b[2] * g + b[3] * x) - (a[0] + a[1] + a[2] * g + a[3] * x);
  }
  return t;
}

}  // namespace netdid
