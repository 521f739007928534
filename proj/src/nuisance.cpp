#include "netdid/nuisance.hpp"

#include <algorithm>
#include <stdexcept>

#include "netdid/errors.hpp"
#include "netdid/glm.hpp"

namespace netdid {

LearnerKind parse_learner(const std::string& s) {
  if (s == "nglm") return LearnerKind::Nglm;
  if (s == "gnn") return LearnerKind::Gnn;
  throw std::invalid_argument("unknown learner '" + s + "' (expected gnn|nglm)");
}

std::string to_string(LearnerKind k) { return k == LearnerKind::Nglm ? "nglm" : "gnn"; }

void LearnerConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("learner config: " + m); };
  if (L < 1 || L > 3) fail("L must be in 1..3");
  if (H < 1 || H > 8) fail("H must be in 1..8");
  if (poly_degree < 1 || poly_degree > 3) fail("poly_degree must be in 1..3");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(lr > 0)) fail("lr must be positive");
  if (!(eps_clip >= 0 && eps_clip < 0.5)) fail("eps_clip must be in [0, 0.5)");
  if (!(ridge >= 0)) fail("ridge must be >= 0");
}

NuisanceLearner::NuisanceLearner(const Graph& g, const Eigen::MatrixXd& X, const LearnerConfig& cfg)
    : g_(g), X_(X), cfg_(cfg) {
  cfg_.validate();
  if (cfg_.learner == LearnerKind::Nglm) features_ = build_features(g, X, cfg_.L, cfg_.poly_degree);
}

NuisanceLearner::NuisanceLearner(const Graph& g, const Eigen::MatrixXd& X, const LearnerConfig& cfg,
                                 FeatureMatrix features)
    : g_(g), X_(X), cfg_(cfg), features_(std::move(features)) {
  cfg_.validate();
  if (cfg_.learner != LearnerKind::Nglm) throw std::invalid_argument("explicit features require the nglm learner");
  if (features_.F.rows() != X.rows()) throw std::invalid_argument("feature rows do not match the data");
}

namespace {

std::uint64_t head_seed(std::uint64_t seed, int head) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(head + 1);
}

GnnConfig gnn_config(const LearnerConfig& c, int head) {
  GnnConfig g;
  g.L = c.L;
  g.H = c.H;
  g.agg = c.aggregation;
  g.epochs = c.epochs;
  g.lr = c.lr;
  g.seed = head_seed(c.seed, head);
  g.optimizer = c.optimizer;
  return g;
}

}  // namespace

Eigen::VectorXd NuisanceLearner::fit_probability(const std::vector<int>& labels, const NodeSet& mask, int head) const {
  if (cfg_.learner == LearnerKind::Nglm) {
    GlmOptions opt;
    opt.ridge = cfg_.ridge;
    const auto fit = fit_logistic(features_.F, labels, mask, opt);
    if (!fit.converged) ++glm_nonconverged_;
    return fit.predict(features_.F);
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i];
  const auto model = gnn_train(g_, X_, y, mask, LossKind::Logistic, gnn_config(cfg_, head));
  return model.predict(g_, X_);
}

Eigen::VectorXd NuisanceLearner::fit_mean(const Eigen::VectorXd& targets, const NodeSet& mask, int head) const {
  if (cfg_.learner == LearnerKind::Nglm) {
    GlmOptions opt;
    opt.ridge = cfg_.ridge;
    return fit_least_squares(features_.F, targets, mask, opt).predict(features_.F);
  }
  const auto model = gnn_train(g_, X_, targets, mask, LossKind::Squared, gnn_config(cfg_, head));
  return model.predict(g_, X_);
}

NodeSet cell_members(std::span<const int> D, std::span<const int> G, int d, int g) {
  std::vector<int> out;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (D[i] == d && G[i] == g) out.push_back(static_cast<int>(i));
  return NodeSet(std::move(out));
}

void finalize_propensity(NuisanceFit& fit, double eps_clip) {
  fit.eps_clip = eps_clip;
  const auto n = fit.p1.size();
  fit.pi_raw.resize(n);
  fit.pi.resize(n);
  fit.clipped_low = fit.clipped_high = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = fit.p1[i] + fit.p0[i];
    const double r = s > 0 ? fit.p1[i] / s : 0.5;
    fit.pi_raw[i] = r;
    if (r < eps_clip) {
      fit.pi[i] = eps_clip;
      ++fit.clipped_low;
    } else if (r > 1.0 - eps_clip) {
      fit.pi[i] = 1.0 - eps_clip;
      ++fit.clipped_high;
    } else {
      fit.pi[i] = r;
    }
  }
}

NuisanceFit make_fit(int g, Eigen::VectorXd p1, Eigen::VectorXd p0, Eigen::VectorXd mu0, double eps_clip,
                     std::optional<Eigen::VectorXd> mu1) {
  if (p1.size() != p0.size() || p1.size() != mu0.size() || (mu1 && mu1->size() != mu0.size())) {
    throw std::invalid_argument("make_fit: prediction lengths differ");
  }
  NuisanceFit fit;
  fit.g = g;
  fit.p1 = std::move(p1);
  fit.p0 = std::move(p0);
  fit.mu0 = std::move(mu0);
  fit.mu1 = std::move(mu1);
  finalize_propensity(fit, eps_clip);
  return fit;
}

NuisanceFit fit_nuisances(const PanelDataset& d, const ExposureVector& G, int g, const NuisanceLearner& learner,
                          bool with_mu1) {
  const int n = d.n();
  if (static_cast<int>(G.G.size()) != n) throw std::invalid_argument("fit_nuisances: exposure length mismatch");
  const auto treated = cell_members(d.D, G.G, 1, g);
  const auto controls = cell_members(d.D, G.G, 0, g);
  if (treated.empty()) throw OverlapError(1, g, "no units with D=1 and G=" + std::to_string(g));
  if (controls.empty()) throw OverlapError(0, g, "no units with D=0 and G=" + std::to_string(g));

  std::vector<int> lab1(n), lab0(n);
  for (int i = 0; i < n; ++i) {
    lab1[i] = d.D[i] == 1 && G.G[i] == g;
    lab0[i] = d.D[i] == 0 && G.G[i] == g;
  }
  const auto all = NodeSet::range(n);
  const Eigen::VectorXd dy = delta_y(d);
  const int before = learner.glm_nonconverged();
  NuisanceFit fit;
  fit.g = g;
  fit.p1 = learner.fit_probability(lab1, all, 10 * g);
  fit.p0 = learner.fit_probability(lab0, all, 10 * g + 1);
  fit.mu0 = learner.fit_mean(dy, controls, 10 * g + 2);
  if (with_mu1) fit.mu1 = learner.fit_mean(dy, treated, 10 * g + 3);
  fit.glm_nonconverged = learner.glm_nonconverged() - before;
  finalize_propensity(fit, learner.config().eps_clip);
  return fit;
}

NuisanceFit fit_nuisances(const PanelDataset& d, const ExposureVector& G, int g, const LearnerConfig& cfg,
                          bool with_mu1) {
  const NuisanceLearner learner(d.graph, d.X, cfg);
  return fit_nuisances(d, G, g, learner, with_mu1);
}

RcsNuisanceFit fit_rcs_nuisances(const RcsDataset& d, const ExposureVector& G, int g, const LearnerConfig& cfg) {
  const int n = d.n();
  if (static_cast<int>(G.G.size()) != n) throw std::invalid_argument("fit_rcs_nuisances: exposure length mismatch");
  const NuisanceLearner learner(d.graph, d.X, cfg);
  std::vector<int> lab1(n), lab0(n);
  std::vector<int> ctrl_pre, ctrl_post;
  int treated_pre = 0, treated_post = 0;
  for (int i = 0; i < n; ++i) {
    const bool cell = G.G[i] == g;
    lab1[i] = cell && d.D[i] == 1;
    lab0[i] = cell && d.D[i] == 0;
    if (lab0[i]) (d.T[i] ? ctrl_post : ctrl_pre).push_back(i);
    if (lab1[i]) (d.T[i] ? treated_post : treated_pre) += 1;
  }
  if (treated_pre == 0 || treated_post == 0) {
    throw OverlapError(1, g, "a survey wave has no units with D=1 and G=" + std::to_string(g));
  }
  if (ctrl_pre.empty() || ctrl_post.empty()) {
    throw OverlapError(0, g, "a survey wave has no units with D=0 and G=" + std::to_string(g));
  }
  const auto all = NodeSet::range(n);
  RcsNuisanceFit fit;
  fit.base.g = g;
  fit.base.p1 = learner.fit_probability(lab1, all, 10 * g);
  fit.base.p0 = learner.fit_probability(lab0, all, 10 * g + 1);
  fit.mu_pre = learner.fit_mean(d.y, NodeSet(ctrl_pre), 10 * g + 4);
  fit.mu_post = learner.fit_mean(d.y, NodeSet(ctrl_post), 10 * g + 5);
  fit.base.mu0 = fit.mu_post - fit.mu_pre;
  fit.base.glm_nonconverged = learner.glm_nonconverged();
  finalize_propensity(fit.base, cfg.eps_clip);
  return fit;
}

}  // namespace netdid
