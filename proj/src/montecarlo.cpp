#include "netdid/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "netdid/errors.hpp"
#include "netdid/parallel.hpp"

namespace netdid {

McEstimand parse_mc_estimand(const std::string& s) {
  if (s == "datt") return McEstimand::DattOverall;
  if (s == "datt_g") return McEstimand::DattLevel;
  if (s == "satt0") return McEstimand::Satt0;
  if (s == "att") return McEstimand::Att;
  if (s == "naive") return McEstimand::Naive;
  throw std::invalid_argument("unknown estimand '" + s + "' (expected datt|datt_g|satt0|att|naive)");
}

std::string to_string(McEstimand e) {
  switch (e) {
    case McEstimand::DattOverall: return "datt";
    case McEstimand::DattLevel: return "datt_g";
    case McEstimand::Satt0: return "satt0";
    case McEstimand::Att: return "att";
    case McEstimand::Naive: return "naive";
  }
  return "?";
}

NuisanceSource parse_nuisance_source(const std::string& s) {
  if (s == "learner") return NuisanceSource::Learner;
  if (s == "oracle") return NuisanceSource::Oracle;
  if (s == "wrong_p") return NuisanceSource::WrongP;
  if (s == "wrong_mu") return NuisanceSource::WrongMu;
  if (s == "wrong_both") return NuisanceSource::WrongBoth;
  throw std::invalid_argument("unknown nuisance source '" + s + "' (expected learner|oracle|wrong_p|wrong_mu|wrong_both)");
}

std::string to_string(NuisanceSource s) {
  switch (s) {
    case NuisanceSource::Learner: return "learner";
    case NuisanceSource::Oracle: return "oracle";
    case NuisanceSource::WrongP: return "wrong_p";
    case NuisanceSource::WrongMu: return "wrong_mu";
    case NuisanceSource::WrongBoth: return "wrong_both";
  }
  return "?";
}

void McConfig::validate() const {
  dgp.validate();
  if (reps < 1) throw std::invalid_argument("mc config: reps must be >= 1");
  if (jobs < 1) throw std::invalid_argument("mc config: jobs must be >= 1");
  if (methods.empty()) throw std::invalid_argument("mc config: no methods");
  if (!(eps_trim < 0.5)) throw std::invalid_argument("mc config: eps_trim must be < 0.5");
  if (!(inference.gamma > 0)) throw std::invalid_argument("mc config: gamma must be positive");
  if (!(inference.level > 0 && inference.level < 1)) throw std::invalid_argument("mc config: level must be in (0, 1)");
  std::set<std::string> names;
  for (const auto& m : methods) {
    if (m.name.empty()) throw std::invalid_argument("mc config: method without a name");
    if (!names.insert(m.name).second) throw std::invalid_argument("mc config: duplicate method '" + m.name + "'");
    m.learner.validate();
    if (m.source != NuisanceSource::Learner) {
      if (dgp.kind != DgpKind::AppendixE || dgp.exposure.kind != ExposureKind::Any) {
        throw std::invalid_argument("mc config: method '" + m.name +
                                    "' needs true nuisances, available only for appendix-e with ANY exposure");
      }
      if (m.estimand == McEstimand::Naive) {
        throw std::invalid_argument("mc config: naive method '" + m.name + "' takes no nuisance source");
      }
    }
    if (m.estimand == McEstimand::DattLevel && m.g < 0) {
      throw std::invalid_argument("mc config: method '" + m.name + "' has a negative level");
    }
  }
}

namespace {

// Levels whose fits an estimand reads.
std::vector<int> levels_needed(const McMethod& m, const SimulatedPanel& sp) {
  std::set<int> out;
  if (m.estimand == McEstimand::DattLevel) {
    out.insert(m.g);
  } else {
    for (int i = 0; i < sp.data.n(); ++i)
      if (sp.data.D[i] == 1) out.insert(sp.G.G[i]);
    if (m.estimand != McEstimand::DattOverall) out.insert(0);
  }
  return {out.begin(), out.end()};
}

double cell_share(const SimulatedPanel& sp, int d, int g) {
  int c = 0;
  for (int i = 0; i < sp.data.n(); ++i) c += sp.data.D[i] == d && sp.G.G[i] == g;
  return static_cast<double>(c) / sp.data.n();
}

double cell_mean(const SimulatedPanel& sp, const Eigen::VectorXd& dy, int d, int g) {
  double s = 0;
  int c = 0;
  for (int i = 0; i < sp.data.n(); ++i)
    if (sp.data.D[i] == d && sp.G.G[i] == g) {
      s += dy[i];
      ++c;
    }
  if (c == 0) throw OverlapError(d, g, "empty cell");
  return s / c;
}

NuisanceFit supplied_fit(const SimulatedPanel& sp, const DgpConfig& dgp, int g, NuisanceSource src, double eps) {
  const int n = sp.data.n();
  const auto truth = appendix_e_truth(sp, dgp, g);
  const Eigen::VectorXd dy = delta_y(sp.data);
  Eigen::VectorXd p1 = truth.p1, p0 = truth.p0, mu0 = truth.mu0, mu1 = truth.mu1;
  if (src == NuisanceSource::WrongP || src == NuisanceSource::WrongBoth) {
    p1 = Eigen::VectorXd::Constant(n, cell_share(sp, 1, g));
    p0 = Eigen::VectorXd::Constant(n, cell_share(sp, 0, g));
  }
  if (src == NuisanceSource::WrongMu || src == NuisanceSource::WrongBoth) {
    mu0 = Eigen::VectorXd::Constant(n, cell_mean(sp, dy, 0, g));
    mu1 = Eigen::VectorXd::Constant(n, cell_mean(sp, dy, 1, g));
  }
  return make_fit(g, std::move(p1), std::move(p0), std::move(mu0), eps, std::move(mu1));
}

double truth_for(const McMethod& m, const PotentialOutcomeTruth& t) {
  switch (m.estimand) {
    case McEstimand::DattOverall:
    case McEstimand::Naive: return t.datt_overall;
    case McEstimand::DattLevel: {
      auto it = t.datt.find(m.g);
      return it == t.datt.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
    case McEstimand::Satt0: return t.satt0;
    case McEstimand::Att: return t.att;
  }
  return 0.0;
}

McRow evaluate(const SimulatedPanel& sp, const McConfig& cfg, const McMethod& m, const PotentialOutcomeTruth& truth,
               int bw) {
  McRow row;
  row.method = m.name;
  row.truth = truth_for(m, truth);
  row.treated = truth.treated;
  row.bandwidth = bw;
  const auto& d = sp.data;
  InferenceConfig inf = cfg.inference;
  inf.jobs = 1;
  PointEstimate pe;
  int trimmed = 0;
  if (m.estimand == McEstimand::Naive) {
    pe = naive_dr_did(d, m.learner).estimate;
  } else {
    LevelFits fits;
    const bool with_mu1 = false;
    std::optional<NuisanceLearner> learner;
    if (m.source == NuisanceSource::Learner) learner.emplace(d.graph, d.X, m.learner);
    for (int g : levels_needed(m, sp)) {
      fits.emplace(g, m.source == NuisanceSource::Learner ? fit_nuisances(d, sp.G, g, *learner, with_mu1)
                                                          : supplied_fit(sp, cfg.dgp, g, m.source, m.learner.eps_clip));
    }
    std::vector<const NuisanceFit*> used;
    for (const auto& [g, f] : fits) used.push_back(&f);
    const auto trim = trim_analysis_set(used, cfg.eps_trim);
    trimmed = trim.trimmed;
    switch (m.estimand) {
      case McEstimand::DattLevel: pe = datt_hat(d, sp.G, m.g, fits.at(m.g), trim.kept); break;
      case McEstimand::DattOverall: pe = datt_overall(d, sp.G, fits, trim.kept); break;
      case McEstimand::Satt0: pe = satt_overall(d, sp.G, 0, fits, trim.kept); break;
      case McEstimand::Att: pe = att_total(d, sp.G, fits, trim.kept).att; break;
      case McEstimand::Naive: break;
    }
  }
  const auto rep = make_report(to_string(m.estimand), pe, d.graph, bw, inf, trimmed);
  row.ok = true;
  row.estimate = rep.estimate;
  row.se_hac = rep.se_hac;
  row.se_iid = rep.se_iid;
  row.hac_negative = rep.hac_negative;
  row.m = rep.m;
  row.trimmed = rep.trimmed;
  row.clipped = rep.clipped;
  row.cover_iid = rep.ci_iid.lo <= row.truth && row.truth <= rep.ci_iid.hi;
  row.cover_hac = rep.ci && rep.ci->lo <= row.truth && row.truth <= rep.ci->hi;
  return row;
}

}  // namespace

std::vector<McRow> evaluate_methods(const SimulatedPanel& sp, const McConfig& cfg, int rep) {
  const auto truth = potential_outcome_effects(sp);
  std::vector<McRow> rows;
  int bw = 0;
  std::string graph_error;
  if (cfg.inference.bandwidth) {
    bw = *cfg.inference.bandwidth;
  } else {
    try {
      bw = bandwidth(sp.data.graph, cfg.inference.gamma, 1).B;
    } catch (const std::exception& e) {
      graph_error = e.what();
    }
  }
  for (const auto& m : cfg.methods) {
    McRow row;
    if (graph_error.empty()) {
      try {
        row = evaluate(sp, cfg, m, truth, bw);
      } catch (const std::exception& e) {
        row = McRow{};
        row.method = m.name;
        row.error = e.what();
      }
    } else {
      row.method = m.name;
      row.error = "bandwidth: " + graph_error;
    }
    row.rep = rep;
    row.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
    if (!row.ok) row.truth = truth_for(m, truth);
    row.treated = truth.treated;
    rows.push_back(std::move(row));
  }
  return rows;
}

McAggregate aggregate_rows(const std::string& method, const std::vector<McRow>& rows) {
  McAggregate a;
  a.method = method;
  double s = 0, st = 0, sb2 = 0, se_h = 0, se_i = 0, tr = 0, bwsum = 0;
  int cov_h = 0, cov_i = 0, nonneg = 0;
  std::vector<double> est;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    ++a.reps;
    if (!r.ok) {
      ++a.failures;
      continue;
    }
    ++a.successes;
    est.push_back(r.estimate);
    s += r.estimate;
    st += r.truth;
    sb2 += (r.estimate - r.truth) * (r.estimate - r.truth);
    se_i += r.se_iid;
    cov_i += r.cover_iid;
    tr += r.treated;
    bwsum += r.bandwidth;
    if (r.hac_negative) {
      ++a.hac_negative;
    } else {
      ++nonneg;
      se_h += r.se_hac;
      cov_h += r.cover_hac;
    }
  }
  if (a.successes == 0) return a;
  const double k = a.successes;
  a.mean = s / k;
  a.mean_truth = st / k;
  a.bias = a.mean - a.mean_truth;
  double ss = 0;
  for (double v : est) ss += (v - a.mean) * (v - a.mean);
  a.sd = a.successes > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
  a.mc_se = a.sd / std::sqrt(k);
  a.rmse = std::sqrt(sb2 / k);
  a.mean_se_iid = se_i / k;
  a.coverage_iid = cov_i / k;
  a.mean_treated = tr / k;
  a.mean_bandwidth = bwsum / k;
  if (nonneg > 0) {
    a.mean_se_hac = se_h / nonneg;
    a.coverage_hac = static_cast<double>(cov_h) / nonneg;
  } else {
    a.mean_se_hac = std::numeric_limits<double>::quiet_NaN();
    a.coverage_hac = std::numeric_limits<double>::quiet_NaN();
  }
  return a;
}

McReport run_monte_carlo(const McConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<McRow>> per_rep(cfg.reps);
  parallel_for(cfg.reps, cfg.jobs, [&](std::size_t r) {
    DgpConfig dgp = cfg.dgp;
    dgp.seed = cfg.base_seed + r;
    std::vector<McRow> rows;
    try {
      const auto sp = simulate(dgp);
      rows = evaluate_methods(sp, cfg, static_cast<int>(r));
    } catch (const std::exception& e) {
      for (const auto& m : cfg.methods) {
        McRow row;
        row.rep = static_cast<int>(r);
        row.method = m.name;
        row.error = std::string("simulate: ") + e.what();
        rows.push_back(std::move(row));
      }
    }
    for (auto& row : rows) row.seed = dgp.seed;
    per_rep[r] = std::move(rows);
  });
  McReport out;
  out.config = cfg;
  bool any = false;
  for (auto& rows : per_rep)
    for (auto& row : rows) {
      any = any || row.ok;
      out.rows.push_back(std::move(row));
    }
  if (!any) {
    const std::string first = out.rows.empty() ? "" : out.rows.front().error;
    throw EstimationError("monte carlo: every replication failed; first error: " + first);
  }
  for (const auto& m : cfg.methods) out.aggregates.push_back(aggregate_rows(m.name, out.rows));
  return out;
}

}  // namespace netdid
