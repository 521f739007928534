#include "netdid/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "csv.hpp"
#include "netdid/dataset.hpp"

namespace netdid {

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

[[noreturn]] void bad(const std::string& where, const std::string& key, const std::string& why) {
  throw std::invalid_argument(where + ": key '" + key + "' " + why);
}

int get_int(const std::string& where, const std::string& key, const Json& v) {
  if (!v.is_number_integer()) bad(where, key, "must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const std::string& where, const std::string& key, const Json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(where, key, "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

double get_double(const std::string& where, const std::string& key, const Json& v) {
  if (!v.is_number()) bad(where, key, "must be a number");
  return v.get<double>();
}

std::string get_string(const std::string& where, const std::string& key, const Json& v) {
  if (!v.is_string()) bad(where, key, "must be a string");
  return v.get<std::string>();
}

void require_object(const std::string& where, const Json& j) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
}

}  // namespace

ExposureMap exposure_from_json(const Json& v, ExposureMap m) {
  const std::string w = "exposure config";
  if (v.is_string()) {
    m.kind = parse_exposure_kind(v.get<std::string>());
    return m;
  }
  if (!v.is_object()) bad(w, "exposure", "must be a kind string or an object");
  for (const auto& [k, x] : v.items()) {
    if (k == "kind") m.kind = parse_exposure_kind(get_string(w, k, x));
    else if (k == "cap") m.cap = get_int(w, k, x);
    else bad(w, k, "is not recognized");
  }
  return m;
}

Json to_json(const LearnerConfig& c) {
  return Json{{"learner", to_string(c.learner)}, {"L", c.L},           {"H", c.H},
              {"poly_degree", c.poly_degree},    {"epochs", c.epochs}, {"lr", c.lr},
              {"seed", c.seed},                  {"eps_clip", c.eps_clip}, {"ridge", c.ridge},
              {"aggregation", to_string(c.aggregation)}, {"optimizer", to_string(c.optimizer)}};
}

LearnerConfig learner_from_json(const Json& j, LearnerConfig c) {
  const std::string w = "learner config";
  require_object(w, j);
  for (const auto& [k, v] : j.items()) {
    try {
      if (k == "learner") c.learner = parse_learner(get_string(w, k, v));
      else if (k == "L") c.L = get_int(w, k, v);
      else if (k == "H") c.H = get_int(w, k, v);
      else if (k == "poly_degree") c.poly_degree = get_int(w, k, v);
      else if (k == "epochs") c.epochs = get_int(w, k, v);
      else if (k == "lr") c.lr = get_double(w, k, v);
      else if (k == "seed") c.seed = get_u64(w, k, v);
      else if (k == "eps_clip") c.eps_clip = get_double(w, k, v);
      else if (k == "ridge") c.ridge = get_double(w, k, v);
      else if (k == "aggregation") c.aggregation = parse_aggregation(get_string(w, k, v));
      else if (k == "optimizer") c.optimizer = parse_optimizer(get_string(w, k, v));
      else bad(w, k, "is not recognized");
    } catch (const Json::exception& e) {
      bad(w, k, e.what());
    }
  }
  c.validate();
  return c;
}

Json to_json(const DgpConfig& c) {
  Json j{{"dgp", to_string(c.kind)},
         {"n", c.n},
         {"seed", c.seed},
         {"radius", c.radius ? Json(*c.radius) : Json(nullptr)},
         {"exposure", to_string(c.exposure.kind)},
         {"exposure_cap", c.exposure.cap},
         {"treat_peer", c.treat_peer},
         {"outcome_peer", c.outcome_peer},
         {"outcome_x_peer", c.outcome_x_peer},
         {"peer_outcome", to_string(c.peer_outcome)},
         {"max_iter", c.max_iter},
         {"tol", c.tol},
         {"theta_d", c.theta_d},
         {"theta_pre", c.theta_pre},
         {"theta_post", c.theta_post}};
  return j;
}

namespace {

template <std::size_t N>
std::array<double, N> get_array(const std::string& w, const std::string& k, const Json& v) {
  if (!v.is_array() || v.size() != N) bad(w, k, "must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = get_double(w, k, v[i]);
  return out;
}

}  // namespace

DgpConfig dgp_from_json(const Json& j, DgpConfig c) {
  const std::string w = "dgp config";
  require_object(w, j);
  for (const auto& [k, v] : j.items()) {
    if (k == "dgp") c.kind = parse_dgp(get_string(w, k, v));
    else if (k == "n") c.n = get_int(w, k, v);
    else if (k == "seed") c.seed = get_u64(w, k, v);
    else if (k == "radius") c.radius = v.is_null() ? std::nullopt : std::optional<double>(get_double(w, k, v));
    else if (k == "exposure") c.exposure = exposure_from_json(v, c.exposure);
    else if (k == "exposure_cap") c.exposure.cap = get_int(w, k, v);
    else if (k == "treat_peer") c.treat_peer = get_double(w, k, v);
    else if (k == "outcome_peer") c.outcome_peer = get_double(w, k, v);
    else if (k == "outcome_x_peer") c.outcome_x_peer = get_double(w, k, v);
    else if (k == "peer_outcome") c.peer_outcome = parse_peer_outcome(get_string(w, k, v));
    else if (k == "max_iter") c.max_iter = get_int(w, k, v);
    else if (k == "tol") c.tol = get_double(w, k, v);
    else if (k == "theta_d") c.theta_d = get_array<2>(w, k, v);
    else if (k == "theta_pre") c.theta_pre = get_array<4>(w, k, v);
    else if (k == "theta_post") c.theta_post = get_array<4>(w, k, v);
    else bad(w, k, "is not recognized");
  }
  return c;
}

Json to_json(const McMethod& m) {
  Json j{{"name", m.name},
         {"estimand", to_string(m.estimand)},
         {"nuisance", to_string(m.source)},
         {"learner", to_json(m.learner)}};
  if (m.estimand == McEstimand::DattLevel) j["g"] = m.g;
  return j;
}

McMethod method_from_json(const Json& j, const LearnerConfig& default_learner) {
  const std::string w = "mc method";
  require_object(w, j);
  McMethod m;
  m.learner = default_learner;
  for (const auto& [k, v] : j.items()) {
    if (k == "name") m.name = get_string(w, k, v);
    else if (k == "estimand") m.estimand = parse_mc_estimand(get_string(w, k, v));
    else if (k == "g") m.g = get_int(w, k, v);
    else if (k == "nuisance") m.source = parse_nuisance_source(get_string(w, k, v));
    else if (k == "learner") m.learner = learner_from_json(v, default_learner);
    else bad(w, k, "is not recognized");
  }
  if (m.name.empty()) throw std::invalid_argument("mc method: missing 'name'");
  return m;
}

Json to_json(const McConfig& c) {
  Json methods = Json::array();
  for (const auto& m : c.methods) methods.push_back(to_json(m));
  return Json{{"dgp", to_json(c.dgp)},
              {"methods", methods},
              {"reps", c.reps},
              {"base_seed", c.base_seed},
              {"jobs", c.jobs},
              {"eps_trim", c.eps_trim},
              {"gamma", c.inference.gamma},
              {"bandwidth", c.inference.bandwidth ? Json(*c.inference.bandwidth) : Json(nullptr)},
              {"level", c.inference.level}};
}

McConfig mc_from_json(const Json& j, McConfig c) {
  const std::string w = "mc config";
  require_object(w, j);
  LearnerConfig default_learner;
  if (j.contains("learner")) default_learner = learner_from_json(j.at("learner"));
  for (const auto& [k, v] : j.items()) {
    if (k == "dgp") c.dgp = dgp_from_json(v, c.dgp);
    else if (k == "learner") continue;
    else if (k == "methods") {
      if (!v.is_array()) bad(w, k, "must be an array");
      c.methods.clear();
      for (const auto& m : v) c.methods.push_back(method_from_json(m, default_learner));
    } else if (k == "reps") c.reps = get_int(w, k, v);
    else if (k == "base_seed") c.base_seed = get_u64(w, k, v);
    else if (k == "jobs") c.jobs = get_int(w, k, v);
    else if (k == "eps_trim") c.eps_trim = get_double(w, k, v);
    else if (k == "gamma") c.inference.gamma = get_double(w, k, v);
    else if (k == "bandwidth") c.inference.bandwidth = v.is_null() ? std::nullopt : std::optional<int>(get_int(w, k, v));
    else if (k == "level") c.inference.level = get_double(w, k, v);
    else bad(w, k, "is not recognized");
  }
  return c;
}

Json to_json(const EstimateReport& r, bool include_scores) {
  Json j{{"estimand", r.estimand},
         {"estimate", num(r.estimate)},
         {"se_hac", num(r.se_hac)},
         {"se_iid", num(r.se_iid)},
         {"var_hac", num(r.var_hac)},
         {"var_iid", num(r.var_iid)},
         {"hac_negative", r.hac_negative},
         {"hac_pairs", r.hac_pairs},
         {"bandwidth", r.bandwidth},
         {"gamma", r.gamma},
         {"level", r.level},
         {"ci", r.ci ? Json{num(r.ci->lo), num(r.ci->hi)} : Json(nullptr)},
         {"ci_iid", Json{num(r.ci_iid.lo), num(r.ci_iid.hi)}},
         {"m", r.m},
         {"trimmed", r.trimmed},
         {"clipped", r.clipped}};
  if (include_scores) {
    Json nodes = Json::array(), scores = Json::array();
    for (int i : r.scores.members) nodes.push_back(i);
    for (double s : r.scores.scores) scores.push_back(num(s));
    j["scores"] = Json{{"nodes", nodes}, {"values", scores}};
  }
  return j;
}

Json to_json(const McRow& r) {
  return Json{{"rep", r.rep},
              {"seed", r.seed},
              {"method", r.method},
              {"ok", r.ok},
              {"error", r.error},
              {"estimate", num(r.estimate)},
              {"truth", num(r.truth)},
              {"se_hac", num(r.se_hac)},
              {"se_iid", num(r.se_iid)},
              {"hac_negative", r.hac_negative},
              {"cover_hac", r.cover_hac},
              {"cover_iid", r.cover_iid},
              {"m", r.m},
              {"bandwidth", r.bandwidth},
              {"treated", r.treated},
              {"trimmed", r.trimmed},
              {"clipped", r.clipped}};
}

Json to_json(const McAggregate& a) {
  return Json{{"method", a.method},
              {"reps", a.reps},
              {"successes", a.successes},
              {"failures", a.failures},
              {"mean", num(a.mean)},
              {"mean_truth", num(a.mean_truth)},
              {"bias", num(a.bias)},
              {"sd", num(a.sd)},
              {"mc_se", num(a.mc_se)},
              {"rmse", num(a.rmse)},
              {"mean_se_hac", num(a.mean_se_hac)},
              {"mean_se_iid", num(a.mean_se_iid)},
              {"coverage_hac", num(a.coverage_hac)},
              {"coverage_iid", num(a.coverage_iid)},
              {"hac_negative", a.hac_negative},
              {"mean_treated", num(a.mean_treated)},
              {"mean_bandwidth", num(a.mean_bandwidth)}};
}

Json to_json(const McReport& r, bool include_rows) {
  Json aggs = Json::array();
  for (const auto& a : r.aggregates) aggs.push_back(to_json(a));
  Json j{{"config", to_json(r.config)}, {"aggregates", aggs}};
  if (include_rows) {
    Json rows = Json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    j["rows"] = rows;
  }
  return j;
}

Json to_json(const GraphStats& s) {
  return Json{{"n", s.n},
              {"edge_count", s.edge_count},
              {"avg_degree", num(s.avg_degree)},
              {"avg_path_length", num(s.avg_path_length)},
              {"max_degree", s.max_degree},
              {"connected_pairs", s.connected_pairs},
              {"disconnected_pairs", s.disconnected_pairs}};
}

Json to_json(const BandwidthChoice& b) {
  return Json{{"B", b.B},
              {"avg_path_length", num(b.avg_path_length)},
              {"avg_degree", num(b.avg_degree)},
              {"threshold", num(b.threshold)},
              {"linear_branch", b.linear_branch},
              {"gamma", b.gamma}};
}

Json to_json(const PotentialOutcomeTruth& t) {
  Json datt = Json::object(), satt1 = Json::object();
  for (const auto& [g, v] : t.datt) datt[std::to_string(g)] = num(v);
  for (const auto& [g, v] : t.satt1) satt1[std::to_string(g)] = num(v);
  return Json{{"datt", datt},         {"datt_overall", num(t.datt_overall)}, {"satt0", num(t.satt0)},
              {"att", num(t.att)},    {"satt1", satt1},                      {"treated", t.treated}};
}

void write_scores_csv(std::ostream& os, const EstimateReport& r, const std::vector<std::string>& ids) {
  os << "id,node,score\n";
  std::size_t k = 0;
  for (int i : r.scores.members) {
    const std::string id = static_cast<std::size_t>(i) < ids.size() ? ids[i] : std::to_string(i);
    os << id << ',' << i << ',' << csv::format_double(r.scores.scores[k++]) << '\n';
  }
}

void write_mc_rows_csv(std::ostream& os, const McReport& r) {
  os << "rep,seed,method,ok,estimate,truth,se_hac,se_iid,hac_negative,cover_hac,cover_iid,m,bandwidth,treated,"
        "trimmed,clipped,error\n";
  for (const auto& row : r.rows) {
    std::string err = row.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    os << row.rep << ',' << row.seed << ',' << row.method << ',' << row.ok << ','
       << csv::format_double(row.estimate) << ',' << csv::format_double(row.truth) << ','
       << csv::format_double(row.se_hac) << ',' << csv::format_double(row.se_iid) << ',' << row.hac_negative << ','
       << row.cover_hac << ',' << row.cover_iid << ',' << row.m << ',' << row.bandwidth << ',' << row.treated << ','
       << row.trimmed << ',' << row.clipped << ',' << err << '\n';
  }
}

void write_mc_summary_table(std::ostream& os, const McReport& r) {
  os << "# method successes failures mean truth bias sd mc_se mean_se_hac mean_se_iid coverage_hac coverage_iid\n";
  char buf[512];
  for (const auto& a : r.aggregates) {
    std::snprintf(buf, sizeof buf, "%s %d %d %.6f %.6f %.6f %.6f %.6f %.6f %.6f %.4f %.4f\n", a.method.c_str(),
                  a.successes, a.failures, a.mean, a.mean_truth, a.bias, a.sd, a.mc_se, a.mean_se_hac, a.mean_se_iid,
                  a.coverage_hac, a.coverage_iid);
    os << buf;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::Io, path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(DataError::Kind::Invalid, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError(DataError::Kind::Io, path + ": cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw DataError(DataError::Kind::Io, path + ": write failed");
}

}  // namespace netdid
