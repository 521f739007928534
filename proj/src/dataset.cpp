#include "netdid/dataset.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "csv.hpp"

namespace netdid {

namespace {

using Kind = DataError::Kind;

std::string where(const std::string& path, int line, const std::string& column) {
  return path + ": line " + std::to_string(line) + ", column '" + column + "'";
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

// Node table with a fixed leading column layout followed by covariates.
struct NodeTable {
  std::string path;
  csv::Table table;
  std::vector<std::string> covariates;
  std::size_t lead = 0;

  double number(std::size_t r, std::size_t c) const {
    const auto& cell = table.rows[r][c];
    const int line = table.line_numbers[r];
    if (is_missing_token(cell)) throw DataError(Kind::Missing, where(path, line, table.header[c]) + ": missing value");
    double v = 0;
    if (!csv::parse_double(cell, v)) {
      throw DataError(Kind::NonNumeric, where(path, line, table.header[c]) + ": non-numeric value '" + cell + "'");
    }
    if (!std::isfinite(v)) throw DataError(Kind::Missing, where(path, line, table.header[c]) + ": non-finite value");
    return v;
  }

  int binary(std::size_t r, std::size_t c) const {
    const double v = number(r, c);
    if (v != 0.0 && v != 1.0) {
      throw DataError(Kind::NonBinary, where(path, table.line_numbers[r], table.header[c]) +
                                           ": expected 0 or 1, got '" + table.rows[r][c] + "'");
    }
    return static_cast<int>(v);
  }

  [[nodiscard]] std::size_t rows() const { return table.rows.size(); }
};

NodeTable read_nodes(const std::string& path, const std::vector<std::string>& lead_names,
                     const std::string& repeated_prefix = {}) {
  NodeTable t;
  t.path = path;
  if (!csv::read_table(path, t.table)) throw DataError(Kind::Io, "cannot open nodes file: " + path);
  const auto& h = t.table.header;
  std::string expected;
  for (const auto& s : lead_names) expected += (expected.empty() ? "" : ",") + s;
  if (h.size() < lead_names.size()) throw DataError(Kind::Header, path + ": header must start with '" + expected + "'");
  for (std::size_t k = 0; k < lead_names.size(); ++k) {
    if (h[k] != lead_names[k]) {
      throw DataError(Kind::Header, path + ": header column " + std::to_string(k + 1) + " is '" + h[k] +
                                        "', expected '" + lead_names[k] + "'");
    }
  }
  t.lead = lead_names.size();
  if (!repeated_prefix.empty()) {
    while (t.lead < h.size() && h[t.lead] == repeated_prefix + std::to_string(t.lead - lead_names.size() + 1)) ++t.lead;
  }
  for (std::size_t k = t.lead; k < h.size(); ++k) {
    if (h[k].empty()) throw DataError(Kind::Header, path + ": empty covariate name in header");
    t.covariates.push_back(h[k]);
  }
  if (t.table.rows.empty()) throw DataError(Kind::LengthMismatch, path + ": no data rows");
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.table.rows[r].size() != h.size()) {
      throw DataError(Kind::LengthMismatch, path + ": line " + std::to_string(t.table.line_numbers[r]) + " has " +
                                                std::to_string(t.table.rows[r].size()) + " cells, header has " +
                                                std::to_string(h.size()));
    }
  }
  return t;
}

std::vector<std::string> read_ids(const NodeTable& t) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> seen;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto& id = t.table.rows[r][0];
    if (id.empty()) throw DataError(Kind::BadNodeId, where(t.path, t.table.line_numbers[r], "id") + ": empty node id");
    if (!seen.emplace(id, static_cast<int>(r)).second) {
      throw DataError(Kind::BadNodeId, where(t.path, t.table.line_numbers[r], "id") + ": duplicate node id '" + id + "'");
    }
    ids.push_back(id);
  }
  return ids;
}

Eigen::MatrixXd read_covariates(const NodeTable& t) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.covariates.size()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t k = 0; k < t.covariates.size(); ++k) X(r, k) = t.number(r, t.lead + k);
  return X;
}

Graph read_edges(const std::string& path, const std::vector<std::string>& ids) {
  csv::Table t;
  if (!csv::read_table(path, t)) throw DataError(Kind::Io, "cannot open edges file: " + path);
  if (t.header.size() != 2 || t.header[0] != "src" || t.header[1] != "dst") {
    throw DataError(Kind::Header, path + ": expected header 'src,dst'");
  }
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<int>(i));
  std::vector<Edge> edges;
  edges.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != 2) {
      throw DataError(Kind::LengthMismatch,
                      path + ": line " + std::to_string(t.line_numbers[r]) + " must have 2 cells");
    }
    int ends[2];
    for (int k = 0; k < 2; ++k) {
      auto it = index.find(row[k]);
      if (it == index.end()) {
        throw DataError(Kind::BadNodeId, where(path, t.line_numbers[r], t.header[k]) + ": unknown node id '" +
                                             row[k] + "'");
      }
      ends[k] = it->second;
    }
    edges.emplace_back(ends[0], ends[1]);
  }
  return Graph::from_edges(static_cast<int>(ids.size()), edges);
}

void fill_defaults(int n, std::vector<std::string>& ids, std::vector<std::string>& names, Eigen::Index p) {
  if (ids.empty()) {
    ids.resize(n);
    for (int i = 0; i < n; ++i) ids[i] = std::to_string(i);
  }
  if (names.empty()) {
    names.resize(static_cast<std::size_t>(p));
    for (Eigen::Index k = 0; k < p; ++k) names[k] = "x" + std::to_string(k + 1);
  }
}

void check_common(int n, const Eigen::MatrixXd& X, const std::vector<std::string>& ids,
                  const std::vector<std::string>& names, const char* what) {
  auto mismatch = [&](const std::string& field, long long got) {
    throw DataError(Kind::LengthMismatch, std::string(what) + ": " + field + " has length " + std::to_string(got) +
                                              ", graph has " + std::to_string(n) + " nodes");
  };
  if (X.rows() != n) mismatch("X", X.rows());
  if (static_cast<int>(ids.size()) != n) mismatch("ids", static_cast<long long>(ids.size()));
  if (static_cast<Eigen::Index>(names.size()) != X.cols()) {
    throw DataError(Kind::LengthMismatch, std::string(what) + ": covariate names do not match X columns");
  }
  if (!X.allFinite()) throw DataError(Kind::Missing, std::string(what) + ": X has non-finite entries");
  std::unordered_map<std::string, int> seen;
  for (const auto& id : ids)
    if (!seen.emplace(id, 0).second) throw DataError(Kind::BadNodeId, std::string(what) + ": duplicate id '" + id + "'");
}

void check_binary(const std::vector<int>& v, int n, const char* field, const char* what) {
  if (static_cast<int>(v.size()) != n) {
    throw DataError(Kind::LengthMismatch, std::string(what) + ": " + field + " has length " + std::to_string(v.size()) +
                                              ", graph has " + std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0 && v[i] != 1) {
      throw DataError(Kind::NonBinary, std::string(what) + ": " + field + "[" + std::to_string(i) + "] = " +
                                           std::to_string(v[i]) + " is not binary");
    }
  }
}

void check_vector(const Eigen::VectorXd& v, int n, const char* field, const char* what) {
  if (v.size() != n) {
    throw DataError(Kind::LengthMismatch, std::string(what) + ": " + field + " has length " + std::to_string(v.size()) +
                                              ", graph has " + std::to_string(n) + " nodes");
  }
  if (!v.allFinite()) throw DataError(Kind::Missing, std::string(what) + ": " + field + " has non-finite entries");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(Kind::Io, "cannot write " + path);
  return out;
}

void write_covariate_header(std::ostream& out, const std::vector<std::string>& names) {
  for (const auto& s : names) out << ',' << s;
  out << '\n';
}

void write_covariates(std::ostream& out, const Eigen::MatrixXd& X, Eigen::Index i) {
  for (Eigen::Index k = 0; k < X.cols(); ++k) out << ',' << csv::format_double(X(i, k));
  out << '\n';
}

void write_edges(const Graph& g, const std::vector<std::string>& ids, const std::string& path) {
  auto out = open_out(path);
  out << "src,dst\n";
  for (const auto& [a, b] : g.edge_list()) out << ids[a] << ',' << ids[b] << '\n';
}

}  // namespace

const char* to_string(DataError::Kind k) {
  switch (k) {
    case Kind::Io: return "io";
    case Kind::Header: return "header";
    case Kind::LengthMismatch: return "length_mismatch";
    case Kind::NonBinary: return "non_binary";
    case Kind::Missing: return "missing_value";
    case Kind::NonNumeric: return "non_numeric";
    case Kind::BadNodeId: return "bad_node_id";
    case Kind::Invalid: return "invalid";
  }
  return "unknown";
}

void PanelDataset::validate() {
  const int n = graph.num_nodes();
  fill_defaults(n, ids, covariate_names, X.cols());
  check_common(n, X, ids, covariate_names, "panel");
  check_binary(D, n, "D", "panel");
  check_vector(y_pre, n, "y_pre", "panel");
  check_vector(y_post, n, "y_post", "panel");
}

void RcsDataset::validate() {
  const int n = graph.num_nodes();
  fill_defaults(n, ids, covariate_names, X.cols());
  check_common(n, X, ids, covariate_names, "rcs");
  check_binary(D, n, "D", "rcs");
  check_binary(T, n, "T", "rcs");
  check_vector(y, n, "y", "rcs");
  int post = 0;
  for (int t : T) post += t;
  if (post == 0 || post == n) throw DataError(Kind::Invalid, "rcs: both waves must be non-empty");
}

void StaggeredPanel::validate() {
  const int n = graph.num_nodes();
  fill_defaults(n, ids, covariate_names, X.cols());
  check_common(n, X, ids, covariate_names, "staggered");
  if (static_cast<int>(adopt_time.size()) != n || Y.rows() != n) {
    throw DataError(Kind::LengthMismatch, "staggered: adopt_time/Y length does not match graph");
  }
  if (Y.cols() < 1) throw DataError(Kind::Invalid, "staggered: need at least one period");
  if (!Y.allFinite()) throw DataError(Kind::Missing, "staggered: Y has non-finite entries");
  bool any_never = false;
  for (int i = 0; i < n; ++i) {
    const int a = adopt_time[i];
    if (a == kNever) {
      any_never = true;
    } else if (a < 1 || a > Y.cols()) {
      throw DataError(Kind::Invalid, "staggered: adopt_time[" + std::to_string(i) + "] = " + std::to_string(a) +
                                         " outside 1.." + std::to_string(Y.cols()));
    }
  }
  if (!any_never) throw DataError(Kind::Invalid, "staggered: at least one never-treated unit is required");
}

PanelDataset load_panel(const std::string& nodes_path, const std::string& edges_path) {
  const auto t = read_nodes(nodes_path, {"id", "d", "y_pre", "y_post"});
  PanelDataset d;
  d.ids = read_ids(t);
  const auto n = static_cast<Eigen::Index>(t.rows());
  d.D.resize(n);
  d.y_pre.resize(n);
  d.y_post.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.D[r] = t.binary(r, 1);
    d.y_pre[r] = t.number(r, 2);
    d.y_post[r] = t.number(r, 3);
  }
  d.X = read_covariates(t);
  d.covariate_names = t.covariates;
  d.graph = read_edges(edges_path, d.ids);
  d.validate();
  return d;
}

void save_panel(const PanelDataset& d, const std::string& nodes_path, const std::string& edges_path) {
  auto out = open_out(nodes_path);
  out << "id,d,y_pre,y_post";
  write_covariate_header(out, d.covariate_names);
  for (int i = 0; i < d.n(); ++i) {
    out << d.ids[i] << ',' << d.D[i] << ',' << csv::format_double(d.y_pre[i]) << ','
        << csv::format_double(d.y_post[i]);
    write_covariates(out, d.X, i);
  }
  write_edges(d.graph, d.ids, edges_path);
}

RcsDataset load_rcs(const std::string& nodes_path, const std::string& edges_path) {
  const auto t = read_nodes(nodes_path, {"id", "d", "t", "y"});
  RcsDataset d;
  d.ids = read_ids(t);
  const auto n = static_cast<Eigen::Index>(t.rows());
  d.D.resize(n);
  d.T.resize(n);
  d.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.D[r] = t.binary(r, 1);
    d.T[r] = t.binary(r, 2);
    d.y[r] = t.number(r, 3);
  }
  d.X = read_covariates(t);
  d.covariate_names = t.covariates;
  d.graph = read_edges(edges_path, d.ids);
  d.validate();
  return d;
}

void save_rcs(const RcsDataset& d, const std::string& nodes_path, const std::string& edges_path) {
  auto out = open_out(nodes_path);
  out << "id,d,t,y";
  write_covariate_header(out, d.covariate_names);
  for (int i = 0; i < d.n(); ++i) {
    out << d.ids[i] << ',' << d.D[i] << ',' << d.T[i] << ',' << csv::format_double(d.y[i]);
    write_covariates(out, d.X, i);
  }
  write_edges(d.graph, d.ids, edges_path);
}

StaggeredPanel load_staggered(const std::string& nodes_path, const std::string& edges_path) {
  const auto t = read_nodes(nodes_path, {"id", "adopt_time"}, "y_");
  const auto periods = static_cast<Eigen::Index>(t.lead - 2);
  if (periods < 1) throw DataError(Kind::Header, nodes_path + ": expected outcome columns y_1..y_T");
  StaggeredPanel d;
  d.ids = read_ids(t);
  const auto n = static_cast<Eigen::Index>(t.rows());
  d.adopt_time.resize(n);
  d.Y.resize(n, periods);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& cell = t.table.rows[r][1];
    long long a = 0;
    if (cell.empty()) {
      a = StaggeredPanel::kNever;
    } else if (!csv::parse_int(cell, a) || a < 1 || a > periods) {
      throw DataError(Kind::Invalid, where(nodes_path, t.table.line_numbers[r], "adopt_time") +
                                         ": expected empty or an integer in 1.." + std::to_string(periods));
    }
    d.adopt_time[r] = static_cast<int>(a);
    for (Eigen::Index k = 0; k < periods; ++k) d.Y(r, k) = t.number(r, 2 + k);
  }
  d.X = read_covariates(t);
  d.covariate_names = t.covariates;
  d.graph = read_edges(edges_path, d.ids);
  d.validate();
  return d;
}

void save_staggered(const StaggeredPanel& d, const std::string& nodes_path, const std::string& edges_path) {
  auto out = open_out(nodes_path);
  out << "id,adopt_time";
  for (int k = 1; k <= d.periods(); ++k) out << ",y_" << k;
  write_covariate_header(out, d.covariate_names);
  for (int i = 0; i < d.n(); ++i) {
    out << d.ids[i] << ',';
    if (d.adopt_time[i] != StaggeredPanel::kNever) out << d.adopt_time[i];
    for (int k = 0; k < d.periods(); ++k) out << ',' << csv::format_double(d.Y(i, k));
    write_covariates(out, d.X, i);
  }
  write_edges(d.graph, d.ids, edges_path);
}

Eigen::VectorXd delta_y(const PanelDataset& d) { return d.y_post - d.y_pre; }

}  // namespace netdid
