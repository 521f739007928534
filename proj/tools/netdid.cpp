// Command-line front end: estimate, simulate, mc, graph-stats.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <sstream>

#include "netdid/dataset.hpp"
#include "netdid/errors.hpp"
#include "netdid/estimators.hpp"
#include "netdid/exposure.hpp"
#include "netdid/graph.hpp"
#include "netdid/montecarlo.hpp"
#include "netdid/parallel.hpp"
#include "netdid/report.hpp"
#include "netdid/simulate.hpp"
#include "netdid/variance.hpp"

using namespace netdid;

namespace {

constexpr int kOk = 0;
constexpr int kEstimationFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every config key has exactly one flag, --key with underscores as dashes.
std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f)
    if (c == '_') c = '-';
  return f;
}

// Registry of flags mirroring config keys. Values given on the command line
// are collected as JSON and laid over the --config file.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
  }

  template <class T>
  CLI::Option* add(const std::string& key, T def, const std::string& help) {
    auto value = std::make_shared<T>(def);
    auto* opt = app_->add_option(flag_name(key), *value, help)->capture_default_str();
    entries_.push_back({key, opt, [value]() { return Json(*value); }});
    keys_.insert(key);
    return opt;
  }

  CLI::Option* add_optional_int(const std::string& key, const std::string& help) {
    auto value = std::make_shared<int>(0);
    auto* opt = app_->add_option(flag_name(key), *value, help + " [default: none]");
    entries_.push_back({key, opt, [value]() { return Json(*value); }});
    keys_.insert(key);
    return opt;
  }

  CLI::Option* add_optional_double(const std::string& key, const std::string& help) {
    auto value = std::make_shared<double>(0);
    auto* opt = app_->add_option(flag_name(key), *value, help + " [default: none]");
    entries_.push_back({key, opt, [value]() { return Json(*value); }});
    keys_.insert(key);
    return opt;
  }

  // Config file contents with command-line values laid over them.
  [[nodiscard]] Json merged() const {
    Json j = Json::object();
    if (!config_.empty()) {
      try {
        j = read_json_file(config_);
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
      if (!j.is_object()) throw UsageError(config_ + ": config must be a JSON object");
      for (const auto& [k, v] : j.items()) {
        if (!keys_.count(k)) throw UsageError(config_ + ": unknown config key '" + k + "'");
      }
      // nested {"exposure": {"kind", "cap"}} form, flattened onto the flag keys
      if (j.contains("exposure") && j["exposure"].is_object()) {
        try {
          const auto m = exposure_from_json(j["exposure"]);
          if (j.contains("exposure_cap") && j["exposure"].contains("cap")) {
            throw UsageError(config_ + ": exposure cap given twice");
          }
          if (j["exposure"].contains("cap")) j["exposure_cap"] = m.cap;
          j["exposure"] = to_string(m.kind);
        } catch (const std::invalid_argument& e) {
          throw UsageError(config_ + ": " + e.what());
        }
      }
    }
    for (const auto& e : entries_)
      if (e.opt->count() > 0) j[e.key] = e.get();
    return j;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<Json()> get;
  };
  CLI::App* app_;
  std::string config_;
  std::vector<Entry> entries_;
  std::set<std::string> keys_;
};

const std::vector<std::string> kLearnerKeys = {"learner", "L",    "H",     "poly_degree", "epochs",   "lr",
                                               "seed",    "eps_clip", "ridge", "aggregation", "optimizer"};
const std::vector<std::string> kDgpKeys = {"dgp",          "n",          "radius",         "exposure",
                                           "exposure_cap", "treat_peer", "outcome_peer",   "outcome_x_peer",
                                           "peer_outcome", "max_iter",   "tol",            "theta_d",
                                           "theta_pre",    "theta_post"};

void add_learner_flags(Flags& f) {
  const LearnerConfig d;
  f.add<std::string>("learner", to_string(d.learner), "nuisance learner: nglm|gnn");
  f.add<int>("L", d.L, "neighborhood depth (NGLM rings / GNN layers)");
  f.add<int>("H", d.H, "GNN hidden width");
  f.add<int>("poly_degree", d.poly_degree, "NGLM polynomial degree (1-3)");
  f.add<int>("epochs", d.epochs, "GNN training epochs");
  f.add<double>("lr", d.lr, "GNN learning rate");
  f.add<std::uint64_t>("seed", d.seed, "learner seed");
  f.add<double>("eps_clip", d.eps_clip, "propensity clipping bound");
  f.add<double>("ridge", d.ridge, "ridge penalty of the GLM fits");
  f.add<std::string>("aggregation", to_string(d.aggregation), "GNN aggregation: pna|mean");
  f.add<std::string>("optimizer", to_string(d.optimizer), "GNN optimizer: adam|gd");
}

void add_dgp_flags(Flags& f, bool with_seed) {
  const DgpConfig d;
  f.add<std::string>("dgp", to_string(d.kind), "design: main-s6|appendix-e");
  f.add<int>("n", d.n, "number of nodes");
  if (with_seed) f.add<std::uint64_t>("seed", d.seed, "simulation seed");
  f.add_optional_double("radius", "connection radius of the geometric graph (sqrt(5/(pi n)) when unset)");
  f.add<std::string>("exposure", to_string(d.exposure.kind), "exposure map: any|count");
  f.add<int>("exposure_cap", d.exposure.cap, "top level of the COUNT map");
  f.add<double>("treat_peer", d.treat_peer, "peer coefficient in the treatment index");
  f.add<double>("outcome_peer", d.outcome_peer, "peer-outcome coefficient");
  f.add<double>("outcome_x_peer", d.outcome_x_peer, "neighbor-covariate coefficient in the post outcome");
  f.add<std::string>("peer_outcome", to_string(d.peer_outcome), "peer outcome: simultaneous|lagged");
  f.add<int>("max_iter", d.max_iter, "equilibrium solver iteration cap");
  f.add<double>("tol", d.tol, "linear-in-means residual tolerance");
  f.add<std::vector<double>>("theta_d", {d.theta_d.begin(), d.theta_d.end()}, "treatment coefficients (2)")
      ->expected(2);
  f.add<std::vector<double>>("theta_pre", {d.theta_pre.begin(), d.theta_pre.end()}, "pre outcome coefficients (4)")
      ->expected(4);
  f.add<std::vector<double>>("theta_post", {d.theta_post.begin(), d.theta_post.end()},
                             "post outcome coefficients (4)")
      ->expected(4);
}

Json pick(const Json& j, const std::vector<std::string>& keys) {
  Json out = Json::object();
  for (const auto& k : keys)
    if (j.contains(k)) out[k] = j.at(k);
  return out;
}

template <class T>
T get_or(const Json& j, const std::string& key, T def) {
  if (!j.contains(key) || j.at(key).is_null()) return def;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

std::string require_string(const Json& j, const std::string& key) {
  const auto v = get_or<std::string>(j, key, "");
  if (v.empty()) throw UsageError("missing required option " + flag_name(key));
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError(DataError::Kind::Io, path + ": cannot open for writing");
  out << text;
}

void print_report_line(const EstimateReport& r) {
  std::printf("%-14s estimate %.6f  se_hac %s  se_iid %.6f  B %d  m %d\n", r.estimand.c_str(), r.estimate,
              r.hac_negative ? "n/a (negative HAC)" : std::to_string(r.se_hac).c_str(), r.se_iid, r.bandwidth, r.m);
  if (r.ci) std::printf("  %.0f%% CI (HAC) [%.6f, %.6f]\n", 100 * r.level, r.ci->lo, r.ci->hi);
  std::printf("  %.0f%% CI (IID) [%.6f, %.6f]\n", 100 * r.level, r.ci_iid.lo, r.ci_iid.hi);
  if (r.trimmed || r.clipped) std::printf("  trimmed %d, clipped %d\n", r.trimmed, r.clipped);
}

// ---------------------------------------------------------------- estimate

void setup_estimate(CLI::App& app, Flags& f) {
  f.add<std::string>("nodes", "", "nodes CSV (panel: id,d,y_pre,y_post,x...; rcs: id,d,t,y,x...)");
  f.add<std::string>("edges", "", "edges CSV (src,dst)");
  f.add<std::string>("format", "panel", "data layout: panel|rcs");
  f.add<std::string>("estimand", "datt", "datt|datt_overall|satt|satt_overall|att|naive|rcs_datt");
  f.add<int>("g", 1, "exposure level for datt, satt and rcs_datt");
  f.add<int>("recipient", 1, "own treatment of the spillover recipients (satt)");
  f.add<std::string>("exposure", "any", "exposure map: any|count");
  f.add<int>("exposure_cap", 3, "top level of the COUNT map");
  add_learner_flags(f);
  f.add<double>("gamma", 1.0, "bandwidth-rule constant");
  f.add_optional_int("bandwidth", "fixed HAC bandwidth overriding the rule");
  f.add<double>("level", 0.95, "confidence level");
  f.add<double>("eps_trim", 0.0, "trim units with cell propensity outside (eps, 1-eps); 0 disables");
  f.add<int>("jobs", default_jobs(), "worker threads for graph searches");
  f.add<std::string>("out", "estimate.json", "report JSON path");
  f.add<std::string>("scores_csv", "", "optional CSV of unit scores");
  (void)app;
}

int run_estimate(const Flags& f) {
  const Json j = f.merged();
  const auto nodes = require_string(j, "nodes");
  const auto edges = require_string(j, "edges");
  const auto format = get_or<std::string>(j, "format", "panel");
  const auto estimand = get_or<std::string>(j, "estimand", "datt");
  const int g = get_or<int>(j, "g", 1);
  const int recipient = get_or<int>(j, "recipient", 1);
  ExposureMap map;
  LearnerConfig lc;
  InferenceConfig inf;
  double eps_trim = 0;
  try {
    map.kind = parse_exposure_kind(get_or<std::string>(j, "exposure", "any"));
    map.cap = get_or<int>(j, "exposure_cap", 3);
    lc = learner_from_json(pick(j, kLearnerKeys));
    inf.gamma = get_or<double>(j, "gamma", 1.0);
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null()) inf.bandwidth = get_or<int>(j, "bandwidth", 0);
    inf.level = get_or<double>(j, "level", 0.95);
    inf.jobs = get_or<int>(j, "jobs", default_jobs());
    eps_trim = get_or<double>(j, "eps_trim", 0.0);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (format != "panel" && format != "rcs") throw UsageError("--format must be panel or rcs");
  if (!(inf.gamma > 0)) throw UsageError("--gamma must be positive");
  if (!(inf.level > 0 && inf.level < 1)) throw UsageError("--level must lie in (0, 1)");
  if (inf.bandwidth && *inf.bandwidth < 0) throw UsageError("--bandwidth must be >= 0");
  if (!(eps_trim < 0.5)) throw UsageError("--eps-trim must be < 0.5");
  if (map.kind == ExposureKind::Count && map.cap < 1) throw UsageError("--exposure-cap must be >= 1");
  static const std::set<std::string> known = {"datt", "datt_overall", "satt", "satt_overall",
                                              "att",  "naive",        "rcs_datt"};
  if (!known.count(estimand)) throw UsageError("unknown estimand '" + estimand + "'");
  if ((estimand == "rcs_datt") != (format == "rcs")) {
    throw UsageError("estimand rcs_datt goes with --format rcs and only with it");
  }

  EstimateReport report;
  const Graph* graph = nullptr;
  PanelDataset panel;
  RcsDataset rcs;
  std::vector<std::string> ids;
  auto bw_of = [&](const Graph& gr) {
    if (inf.bandwidth) return *inf.bandwidth;
    return bandwidth(gr, inf.gamma, inf.jobs).B;
  };
  if (format == "rcs") {
    rcs = load_rcs(nodes, edges);
    graph = &rcs.graph;
    ids = rcs.ids;
    const auto G = compute_exposure(rcs.graph, rcs.D, map);
    const auto fit = fit_rcs_nuisances(rcs, G, g, lc);
    const auto trim = trim_analysis_set(fit.base, eps_trim);
    const auto pe = rcs_datt_hat(rcs, G, g, fit, trim.kept);
    report = make_report("RCS-DATT(" + std::to_string(g) + ")", pe, rcs.graph, bw_of(rcs.graph), inf, trim.trimmed);
  } else {
    panel = load_panel(nodes, edges);
    graph = &panel.graph;
    ids = panel.ids;
    const auto G = compute_exposure(panel.graph, panel.D, map);
    if (estimand == "naive") {
      const auto res = naive_dr_did(panel, lc);
      report = make_report("NAIVE", res.estimate, panel.graph, bw_of(panel.graph), inf, 0);
    } else {
      std::set<int> levels;
      if (estimand == "datt") {
        levels.insert(g);
      } else if (estimand == "satt") {
        levels = {0, g};
      } else {
        for (int i = 0; i < panel.n(); ++i)
          if (panel.D[i] == 1) levels.insert(G.G[i]);
        if (estimand != "datt_overall") levels.insert(0);
      }
      const bool with_mu1 = (estimand == "satt" || estimand == "satt_overall") && recipient == 1;
      const NuisanceLearner learner(panel.graph, panel.X, lc);
      LevelFits fits;
      for (int lv : levels) fits.emplace(lv, fit_nuisances(panel, G, lv, learner, with_mu1));
      std::vector<const NuisanceFit*> used;
      for (const auto& [lv, fit] : fits) used.push_back(&fit);
      const auto trim = trim_analysis_set(used, eps_trim);
      const int bw = bw_of(panel.graph);
      PointEstimate pe;
      std::string tag;
      if (estimand == "datt") {
        pe = datt_hat(panel, G, g, fits.at(g), trim.kept);
        tag = "DATT(" + std::to_string(g) + ")";
      } else if (estimand == "datt_overall") {
        pe = datt_overall(panel, G, fits, trim.kept);
        tag = "DATT overall";
      } else if (estimand == "satt") {
        pe = satt_hat(panel, G, g, recipient, fits, trim.kept);
        tag = "SATT(" + std::to_string(g) + ";" + std::to_string(recipient) + ")";
      } else if (estimand == "satt_overall") {
        pe = satt_overall(panel, G, recipient, fits, trim.kept);
        tag = "SATT(" + std::to_string(recipient) + ") overall";
      } else {
        pe = att_total(panel, G, fits, trim.kept).att;
        tag = "ATT";
      }
      report = make_report(tag, pe, panel.graph, bw, inf, trim.trimmed);
    }
  }
  Json out = to_json(report);
  out["learner"] = to_json(lc);
  out["exposure"] = to_string(map.kind);
  if (map.kind == ExposureKind::Count) out["exposure_cap"] = map.cap;
  out["input"] = Json{{"nodes", nodes}, {"edges", edges}, {"format", format}, {"n", graph->num_nodes()}};
  out["eps_trim"] = eps_trim;
  const auto path = get_or<std::string>(j, "out", "estimate.json");
  write_json_file(path, out);
  const auto scores_path = get_or<std::string>(j, "scores_csv", "");
  if (!scores_path.empty()) {
    std::ostringstream os;
    write_scores_csv(os, report, ids);
    write_text(scores_path, os.str());
  }
  print_report_line(report);
  std::printf("report written to %s\n", path.c_str());
  return kOk;
}

// ---------------------------------------------------------------- simulate

void setup_simulate(Flags& f) {
  add_dgp_flags(f, true);
  f.add<std::string>("out_prefix", "sim", "writes <prefix>_nodes.csv, <prefix>_edges.csv, <prefix>_truth.json");
}

DgpConfig dgp_of(const Json& j) {
  try {
    auto c = dgp_from_json(pick(j, [] {
      auto k = kDgpKeys;
      k.push_back("seed");
      return k;
    }()));
    c.validate();
    return c;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int run_simulate(const Flags& f) {
  const Json j = f.merged();
  const auto cfg = dgp_of(j);
  const auto prefix = get_or<std::string>(j, "out_prefix", "sim");
  const auto sp = simulate(cfg);
  save_panel(sp.data, prefix + "_nodes.csv", prefix + "_edges.csv");
  const auto truth = potential_outcome_effects(sp);
  Json t = to_json(truth);
  t["config"] = to_json(cfg);
  t["treatment_iterations"] = sp.treatment_iterations;
  t["treatment_converged"] = sp.treatment_converged;
  t["outcome_iterations"] = sp.outcome_iterations;
  t["outcome_residual"] = sp.outcome_residual;
  write_json_file(prefix + "_truth.json", t);
  std::printf("simulated %s n=%d seed=%llu treated=%d\n", to_string(cfg.kind).c_str(), cfg.n,
              static_cast<unsigned long long>(cfg.seed), truth.treated);
  for (const auto& [g, v] : truth.datt) std::printf("  true DATT(%d) = %.6f\n", g, v);
  std::printf("  true DATT overall = %.6f, ATT = %.6f\n", truth.datt_overall, truth.att);
  if (!sp.treatment_converged) std::printf("  warning: treatment best responses did not converge\n");
  return kOk;
}

// ---------------------------------------------------------------- mc

void setup_mc(Flags& f) {
  add_dgp_flags(f, false);
  add_learner_flags(f);
  f.add<int>("reps", 100, "replications");
  f.add<std::uint64_t>("base_seed", 1, "replication r uses seed base_seed + r");
  f.add<std::string>("methods", "nglm",
                     "comma list of methods: gnn|nglm|naive|oracle|wrong_p|wrong_mu|wrong_both, each optionally "
                     "followed by :key=value;key=value learner overrides");
  f.add<std::string>("estimand", "datt", "estimand of non-naive methods: datt|datt_g|satt0|att");
  f.add<int>("g", 1, "level for estimand datt_g");
  f.add<double>("eps_trim", 0.0, "trimming bound; 0 disables");
  f.add<double>("gamma", 1.0, "bandwidth-rule constant");
  f.add_optional_int("bandwidth", "fixed HAC bandwidth overriding the rule");
  f.add<double>("level", 0.95, "confidence level");
  f.add<int>("jobs", default_jobs(), "replications run in parallel");
  f.add<std::string>("out", "mc.json", "report JSON path");
  f.add<std::string>("rows_csv", "", "optional CSV of per-replication rows");
  f.add<std::string>("summary", "", "optional whitespace-separated aggregate table");
}

std::vector<McMethod> parse_methods(const std::string& list, McEstimand estimand, int g, const LearnerConfig& base) {
  std::vector<McMethod> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    McMethod m;
    m.name = tok;
    m.learner = base;
    const auto colon = tok.find(':');
    const std::string head = tok.substr(0, colon);
    if (colon != std::string::npos) {
      Json over = Json::object();
      std::stringstream kv(tok.substr(colon + 1));
      std::string item;
      while (std::getline(kv, item, ';')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("method '" + tok + "': expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        Json v = Json::parse(val, nullptr, false);
        over[key] = v.is_discarded() ? Json(val) : v;
      }
      m.learner = learner_from_json(over, base);
    }
    m.estimand = estimand;
    m.g = g;
    if (head == "gnn" || head == "nglm") {
      m.learner.learner = parse_learner(head);
    } else if (head == "naive") {
      m.estimand = McEstimand::Naive;
    } else {
      m.source = parse_nuisance_source(head);
      if (m.source == NuisanceSource::Learner) throw UsageError("method 'learner': use gnn or nglm");
    }
    out.push_back(std::move(m));
  }
  if (out.empty()) throw UsageError("--methods is empty");
  return out;
}

int run_mc(const Flags& f) {
  const Json j = f.merged();
  McConfig cfg;
  try {
    cfg.dgp = dgp_from_json(pick(j, kDgpKeys));
    const auto lc = learner_from_json(pick(j, kLearnerKeys));
    const auto estimand = parse_mc_estimand(get_or<std::string>(j, "estimand", "datt"));
    if (estimand == McEstimand::Naive) throw UsageError("--estimand naive: list naive in --methods instead");
    cfg.methods = parse_methods(get_or<std::string>(j, "methods", "nglm"), estimand, get_or<int>(j, "g", 1), lc);
    cfg.reps = get_or<int>(j, "reps", 100);
    cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", 1);
    cfg.jobs = get_or<int>(j, "jobs", default_jobs());
    cfg.eps_trim = get_or<double>(j, "eps_trim", 0.0);
    cfg.inference.gamma = get_or<double>(j, "gamma", 1.0);
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null()) cfg.inference.bandwidth = get_or<int>(j, "bandwidth", 0);
    cfg.inference.level = get_or<double>(j, "level", 0.95);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto report = run_monte_carlo(cfg);
  const auto path = get_or<std::string>(j, "out", "mc.json");
  write_json_file(path, to_json(report));
  const auto rows = get_or<std::string>(j, "rows_csv", "");
  if (!rows.empty()) {
    std::ostringstream os;
    write_mc_rows_csv(os, report);
    write_text(rows, os.str());
  }
  const auto summary = get_or<std::string>(j, "summary", "");
  std::ostringstream table;
  write_mc_summary_table(table, report);
  if (!summary.empty()) write_text(summary, table.str());
  std::cout << table.str();
  std::printf("report written to %s\n", path.c_str());
  return kOk;
}

// ---------------------------------------------------------------- graph-stats

void setup_graph_stats(Flags& f) {
  f.add<std::string>("edges", "", "edges CSV (src,dst), zero-based integer ids");
  f.add<int>("n", -1, "node count; one past the largest id when negative");
  f.add<double>("gamma", 1.0, "bandwidth-rule constant");
  f.add<int>("jobs", default_jobs(), "worker threads");
  f.add<std::string>("out", "", "optional JSON path (stdout always gets the JSON)");
}

int run_graph_stats(const Flags& f) {
  const Json j = f.merged();
  const auto edges = require_string(j, "edges");
  const double gamma = get_or<double>(j, "gamma", 1.0);
  const int jobs = get_or<int>(j, "jobs", default_jobs());
  if (!(gamma > 0)) throw UsageError("--gamma must be positive");
  const Graph g = read_edge_list_csv(edges, get_or<int>(j, "n", -1));
  const auto stats = graph_stats(g, jobs);
  Json out = to_json(stats);
  out["bandwidth"] = to_json(bandwidth_rule(stats.avg_path_length, stats.avg_degree, stats.n, gamma));
  const auto path = get_or<std::string>(j, "out", "");
  if (!path.empty()) write_json_file(path, out);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // GNN training reallocates the same few hundred-kilobyte buffers every
  // epoch; keep them on the heap instead of round-tripping through mmap.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
  CLI::App app{"Doubly robust difference-in-differences under network interference"};
  app.require_subcommand(1);
  auto* est = app.add_subcommand("estimate", "estimate a treatment effect from panel or repeated cross-section data");
  auto* sim = app.add_subcommand("simulate", "simulate a dataset with its potential-outcome truth");
  auto* mc = app.add_subcommand("mc", "Monte Carlo study");
  auto* gs = app.add_subcommand("graph-stats", "graph statistics and HAC bandwidth");
  Flags fe(est), fs(sim), fm(mc), fg(gs);
  setup_estimate(*est, fe);
  setup_simulate(fs);
  setup_mc(fm);
  setup_graph_stats(fg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (est->parsed()) return run_estimate(fe);
    if (sim->parsed()) return run_simulate(fs);
    if (mc->parsed()) return run_mc(fm);
    if (gs->parsed()) return run_graph_stats(fg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "input error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return kUsage;
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return kEstimationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kEstimationFailure;
  }
  return kUsage;
}
