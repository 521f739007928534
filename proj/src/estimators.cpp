#include "netdid/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "netdid/errors.hpp"
#include "netdid/features.hpp"

namespace netdid {

namespace {

// Score sum a and count indicator c per analysis-set member for one
// ratio A / N.
struct Ratio {
  std::vector<double> a;
  std::vector<double> c;
  [[nodiscard]] double A() const {
    double s = 0;
    for (double v : a) s += v;
    return s;
  }
  [[nodiscard]] double N() const {
    double s = 0;
    for (double v : c) s += v;
    return s;
  }
};

// Estimate A / N with scores tau + (a_i - tau c_i) / (N / m).
PointEstimate single_ratio(const Ratio& r, const NodeSet& members, int g) {
  const double N = r.N();
  const auto m = static_cast<double>(members.size());
  PointEstimate pe;
  pe.estimate = r.A() / N;
  pe.scores.g = g;
  pe.scores.members = members;
  pe.scores.scores.resize(r.a.size());
  for (std::size_t k = 0; k < r.a.size(); ++k) pe.scores.scores[k] = pe.estimate + (r.a[k] - pe.estimate * r.c[k]) / (N / m);
  return pe;
}

// Estimate sum_g (N1g / N1) (A_g / N_g) with the matching linearization.
// weight_c[g] are the treated-at-g indicators, total_c the treated indicators.
PointEstimate weighted_ratios(const std::map<int, Ratio>& terms, const std::map<int, std::vector<double>>& weight_c,
                              const std::vector<double>& total_c, const NodeSet& members) {
  const auto m = static_cast<double>(members.size());
  double N1 = 0;
  for (double v : total_c) N1 += v;
  PointEstimate pe;
  pe.scores.members = members;
  pe.scores.scores.assign(members.size(), 0.0);
  std::map<int, double> tau, w;
  for (const auto& [g, r] : terms) {
    double N1g = 0;
    for (double v : weight_c.at(g)) N1g += v;
    w[g] = N1g / N1;
    tau[g] = N1g > 0 ? r.A() / r.N() : 0.0;
    pe.estimate += w[g] * tau[g];
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    double u = pe.estimate;
    for (const auto& [g, r] : terms) {
      if (w[g] == 0) continue;
      u += w[g] * (r.a[k] - tau[g] * r.c[k]) / (r.N() / m);
      u += tau[g] * (weight_c.at(g)[k] - w[g] * total_c[k]) / (N1 / m);
    }
    pe.scores.scores[k] = u;
  }
  return pe;
}

Ratio datt_ratio(const PanelDataset& d, const ExposureVector& G, int g, const NuisanceFit& fit, const Eigen::VectorXd& dy,
                 const NodeSet& members) {
  Ratio r;
  for (int i : members) {
    r.a.push_back(dr_score(i, d.D, G.G, dy, fit, g));
    r.c.push_back(d.D[i] == 1 && G.G[i] == g ? 1.0 : 0.0);
  }
  return r;
}

// Clipping events among units whose weight uses the fit (G_i = g).
int clipped_in(const NuisanceFit& fit, std::span<const int> G, int g, const NodeSet& members) {
  int c = 0;
  for (int i : members) c += G[i] == g && fit.pi[i] != fit.pi_raw[i];
  return c;
}

const NuisanceFit& level_fit(const LevelFits& fits, int g, const char* what) {
  auto it = fits.find(g);
  if (it == fits.end()) throw EstimationError(std::string(what) + ": no nuisance fit for exposure level " + std::to_string(g));
  return it->second;
}

void check_members(const NodeSet& members, int n) {
  if (members.size() < 2) throw EstimationError("analysis set has fewer than 2 units");
  if (members.nodes().back() >= n || members.nodes().front() < 0) throw std::invalid_argument("analysis set out of range");
}

}  // namespace

double dr_score(int i, std::span<const int> D, std::span<const int> G, const Eigen::VectorXd& dy, const NuisanceFit& fit,
                int g) {
  if (G[i] != g) return 0.0;
  const double pi = fit.pi[i];
  const double w = D[i] == 1 ? 1.0 : -pi / (1.0 - pi);
  return w * (dy[i] - fit.mu0[i]);
}

TrimResult trim_analysis_set(const NuisanceFit& fit, double eps_trim) {
  const NuisanceFit* one[] = {&fit};
  return trim_analysis_set(one, eps_trim);
}

TrimResult trim_analysis_set(std::span<const NuisanceFit* const> fits, double eps_trim) {
  if (fits.empty()) throw std::invalid_argument("trim_analysis_set: no fits");
  const auto n = fits.front()->pi_raw.size();
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool keep = true;
    if (eps_trim > 0) {
      for (const auto* f : fits) {
        const double p = f->pi_raw[i];
        if (!(p > eps_trim && p < 1.0 - eps_trim)) keep = false;
      }
    }
    if (keep) kept.push_back(static_cast<int>(i));
  }
  TrimResult t;
  t.trimmed = static_cast<int>(n) - static_cast<int>(kept.size());
  t.kept = NodeSet(std::move(kept));
  if (t.kept.empty()) throw EstimationError("trimming removed every unit (eps_trim = " + std::to_string(eps_trim) + ")");
  return t;
}

PointEstimate datt_hat(const PanelDataset& d, const ExposureVector& G, int g, const NuisanceFit& fit,
                       const NodeSet& members) {
  check_members(members, d.n());
  const Eigen::VectorXd dy = delta_y(d);
  const Ratio r = datt_ratio(d, G, g, fit, dy, members);
  if (r.N() == 0) throw OverlapError(1, g, "no treated units at this level in the analysis set");
  auto pe = single_ratio(r, members, g);
  pe.clipped = clipped_in(fit, G.G, g, members);
  return pe;
}

PointEstimate datt_overall(const PanelDataset& d, const ExposureVector& G, const LevelFits& fits,
                           const NodeSet& members) {
  check_members(members, d.n());
  const Eigen::VectorXd dy = delta_y(d);
  std::map<int, Ratio> terms;
  std::map<int, std::vector<double>> weight_c;
  std::vector<double> total_c;
  for (int i : members) total_c.push_back(d.D[i] == 1 ? 1.0 : 0.0);
  std::map<int, int> realized;
  for (int i : members)
    if (d.D[i] == 1) ++realized[G.G[i]];
  if (realized.empty()) throw EstimationError("datt_overall: no treated units in the analysis set");
  int clipped = 0;
  for (const auto& [g, count] : realized) {
    const auto& fit = level_fit(fits, g, "datt_overall");
    terms[g] = datt_ratio(d, G, g, fit, dy, members);
    weight_c[g] = terms[g].c;
    clipped += clipped_in(fit, G.G, g, members);
  }
  auto pe = weighted_ratios(terms, weight_c, total_c, members);
  pe.clipped = clipped;
  return pe;
}

namespace {

// Spillover ratio at level g vs 0 for recipients with own treatment r.
Ratio satt_ratio(const PanelDataset& d, const ExposureVector& G, int g, int recipient, const LevelFits& fits,
                 const Eigen::VectorXd& dy, const NodeSet& members, double& eps, int& clipped) {
  const auto& fg = level_fit(fits, g, "satt");
  const auto& f0 = level_fit(fits, 0, "satt");
  const Eigen::VectorXd* mu = nullptr;
  if (recipient == 1) {
    if (!f0.mu1) throw EstimationError("satt: level-0 fit lacks the treated outcome regression");
    mu = &*f0.mu1;
  } else {
    mu = &f0.mu0;
  }
  const Eigen::VectorXd& pg = recipient == 1 ? fg.p1 : fg.p0;
  const Eigen::VectorXd& p0 = recipient == 1 ? f0.p1 : f0.p0;
  eps = fg.eps_clip;
  Ratio r;
  for (int i : members) {
    const bool own = d.D[i] == recipient;
    double a = 0;
    if (own && (G.G[i] == g || G.G[i] == 0)) {
      if (G.G[i] == g) {
        a = dy[i] - (*mu)[i];
      } else {
        const double s = pg[i] + p0[i];
        double q = s > 0 ? pg[i] / s : 0.5;
        const double qc = std::clamp(q, eps, 1.0 - eps);
        clipped += qc != q;
        a = -qc / (1.0 - qc) * (dy[i] - (*mu)[i]);
      }
    }
    r.a.push_back(a);
    r.c.push_back(own && G.G[i] == g ? 1.0 : 0.0);
  }
  return r;
}

}  // namespace

PointEstimate satt_hat(const PanelDataset& d, const ExposureVector& G, int g, int recipient, const LevelFits& fits,
                       const NodeSet& members) {
  if (recipient != 0 && recipient != 1) throw std::invalid_argument("satt: recipient must be 0 or 1");
  if (g == 0) throw std::invalid_argument("satt: level 0 is the reference level");
  check_members(members, d.n());
  const Eigen::VectorXd dy = delta_y(d);
  double eps = 0;
  int clipped = 0;
  const Ratio r = satt_ratio(d, G, g, recipient, fits, dy, members, eps, clipped);
  if (r.N() == 0) throw OverlapError(recipient, g, "no recipients at this level in the analysis set");
  auto pe = single_ratio(r, members, g);
  pe.clipped = clipped;
  return pe;
}

PointEstimate satt_overall(const PanelDataset& d, const ExposureVector& G, int recipient, const LevelFits& fits,
                           const NodeSet& members) {
  if (recipient != 0 && recipient != 1) throw std::invalid_argument("satt: recipient must be 0 or 1");
  check_members(members, d.n());
  const Eigen::VectorXd dy = delta_y(d);
  std::vector<double> total_c;
  std::map<int, std::vector<double>> weight_c;
  for (int i : members) total_c.push_back(d.D[i] == 1 ? 1.0 : 0.0);
  if (std::all_of(total_c.begin(), total_c.end(), [](double v) { return v == 0; })) {
    throw EstimationError("satt_overall: no treated units in the analysis set");
  }
  std::map<int, Ratio> terms;
  int clipped = 0;
  for (const auto& [g, fit] : fits) {
    if (g == 0) continue;
    std::vector<double> c1g;
    bool any = false;
    for (int i : members) {
      c1g.push_back(d.D[i] == 1 && G.G[i] == g ? 1.0 : 0.0);
      any = any || c1g.back() != 0;
    }
    if (!any) continue;
    double eps = 0;
    Ratio r = satt_ratio(d, G, g, recipient, fits, dy, members, eps, clipped);
    if (r.N() == 0) throw OverlapError(recipient, g, "no recipients at this level in the analysis set");
    terms[g] = std::move(r);
    weight_c[g] = std::move(c1g);
  }
  if (terms.empty()) {
    // Every treated unit sits at level 0: the spillover is zero by definition.
    PointEstimate pe;
    pe.scores.members = members;
    pe.scores.scores.assign(members.size(), 0.0);
    return pe;
  }
  auto pe = weighted_ratios(terms, weight_c, total_c, members);
  pe.clipped = clipped;
  return pe;
}

AttDecomposition att_total(const PanelDataset& d, const ExposureVector& G, const LevelFits& fits,
                           const NodeSet& members) {
  AttDecomposition out;
  out.datt = datt_overall(d, G, fits, members);
  out.satt0 = satt_overall(d, G, 0, fits, members);
  out.att.estimate = out.datt.estimate + out.satt0.estimate;
  out.att.scores.members = members;
  out.att.scores.scores.resize(members.size());
  for (std::size_t k = 0; k < members.size(); ++k)
    out.att.scores.scores[k] = out.datt.scores.scores[k] + out.satt0.scores.scores[k];
  out.att.clipped = out.datt.clipped + out.satt0.clipped;
  return out;
}

PointEstimate rcs_datt_hat(const RcsDataset& d, const ExposureVector& G, int g, const RcsNuisanceFit& fit,
                           const NodeSet& members) {
  check_members(members, d.n());
  Ratio post, pre;
  for (int i : members) {
    double a = 0, c = 0;
    if (G.G[i] == g) {
      const double pi = fit.base.pi[i];
      const double w = d.D[i] == 1 ? 1.0 : -pi / (1.0 - pi);
      const double mu = d.T[i] ? fit.mu_post[i] : fit.mu_pre[i];
      a = w * (d.y[i] - mu);
      c = d.D[i] == 1 ? 1.0 : 0.0;
    }
    const bool t1 = d.T[i] == 1;
    post.a.push_back(t1 ? a : 0.0);
    post.c.push_back(t1 ? c : 0.0);
    pre.a.push_back(t1 ? 0.0 : a);
    pre.c.push_back(t1 ? 0.0 : c);
  }
  if (post.N() == 0 || pre.N() == 0) throw OverlapError(1, g, "a survey wave has no treated units at this level");
  const auto m = static_cast<double>(members.size());
  const double t1 = post.A() / post.N();
  const double t0 = pre.A() / pre.N();
  PointEstimate pe;
  pe.estimate = t1 - t0;
  pe.scores.g = g;
  pe.scores.members = members;
  pe.scores.scores.resize(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    pe.scores.scores[k] = pe.estimate + (post.a[k] - t1 * post.c[k]) / (post.N() / m) -
                          (pre.a[k] - t0 * pre.c[k]) / (pre.N() / m);
  }
  pe.clipped = clipped_in(fit.base, G.G, g, members);
  return pe;
}

NaiveResult naive_dr_did(const PanelDataset& d, const LearnerConfig& cfg) {
  int treated = 0;
  for (int v : d.D) treated += v;
  if (treated == 0 || treated == d.n()) throw EstimationError("naive_dr_did: treatment has a single value");
  LearnerConfig c = cfg;
  c.learner = LearnerKind::Nglm;
  const NuisanceLearner learner(d.graph, d.X, c, build_covariate_features(d.X, c.poly_degree));
  ExposureVector G;
  G.G.assign(d.n(), 0);
  G.levels = {0};
  NaiveResult out;
  out.fit = fit_nuisances(d, G, 0, learner);
  out.estimate = datt_hat(d, G, 0, out.fit, NodeSet::range(d.n()));
  return out;
}

StaggeredMatch staggered_match(const StaggeredPanel& sp, int t, const ExposureMap& map) {
  if (t < 1 || t > sp.periods()) throw std::invalid_argument("staggered_match: period out of range");
  const int n = sp.n();
  std::vector<int> status(n);
  for (int i = 0; i < n; ++i) status[i] = sp.treated_at(i, t) ? 1 : 0;
  StaggeredMatch out;
  out.t = t;
  std::vector<int> pool;
  for (int i = 0; i < n; ++i)
    if (!status[i]) pool.push_back(i);
  for (int i = 0; i < n; ++i) {
    if (sp.adopt_time[i] != t) continue;
    StaggeredMatchEntry e;
    e.unit = i;
    e.exposure = map.level(sp.graph, status, i);
    for (int j : pool)
      if (map.level(sp.graph, status, j) == e.exposure) e.matches.push_back(j);
    if (e.matches.empty()) out.unmatched.push_back(i);
    out.entries.push_back(std::move(e));
  }
  return out;
}

PanelDataset matched_subpanel(const StaggeredPanel& sp, const StaggeredMatch& match) {
  if (match.t < 2) throw std::invalid_argument("matched_subpanel: need a pre-period (t >= 2)");
  std::vector<int> units;
  for (const auto& e : match.entries) {
    if (e.matches.empty()) continue;
    units.push_back(e.unit);
    units.insert(units.end(), e.matches.begin(), e.matches.end());
  }
  const NodeSet keep(std::move(units));
  PanelDataset d;
  d.graph = sp.graph.induced(keep);
  const auto m = static_cast<Eigen::Index>(keep.size());
  d.X.resize(m, sp.X.cols());
  d.y_pre.resize(m);
  d.y_post.resize(m);
  Eigen::Index k = 0;
  for (int i : keep) {
    d.X.row(k) = sp.X.row(i);
    d.D.push_back(sp.adopt_time[i] == match.t ? 1 : 0);
    d.y_pre[k] = sp.Y(i, match.t - 2);
    d.y_post[k] = sp.Y(i, match.t - 1);
    d.ids.push_back(sp.ids.empty() ? std::to_string(i) : sp.ids[i]);
    ++k;
  }
  d.covariate_names = sp.covariate_names;
  d.validate();
  return d;
}

EstimateReport make_report(const std::string& estimand, const PointEstimate& pe, const Graph& g, int bw,
                           const InferenceConfig& inf, int trimmed) {
  EstimateReport r;
  r.estimand = estimand;
  r.estimate = pe.estimate;
  r.scores = pe.scores;
  r.m = static_cast<int>(pe.scores.members.size());
  r.trimmed = trimmed;
  r.clipped = pe.clipped;
  r.gamma = inf.gamma;
  r.level = inf.level;
  r.bandwidth = bw;
  r.var_iid = iid_variance(pe.scores.scores);
  const auto hac = hac_variance(pe.scores.scores, pe.scores.members, g, bw, inf.jobs);
  r.var_hac = hac.value;
  r.hac_pairs = hac.pairs;
  r.hac_negative = hac.value < 0;
  const auto m = static_cast<double>(r.m);
  r.se_iid = std::sqrt(r.var_iid / m);
  r.ci_iid = confidence_interval(r.estimate, r.var_iid, r.m, inf.level);
  if (r.hac_negative) {
    r.se_hac = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.se_hac = std::sqrt(r.var_hac / m);
    r.ci = confidence_interval(r.estimate, r.var_hac, r.m, inf.level);
  }
  return r;
}

}  // namespace netdid
