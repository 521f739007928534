#include "netdid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>

#include "csv.hpp"
#include "netdid/parallel.hpp"

namespace netdid {

int Distance::hops() const {
  if (!is_finite()) throw GraphError("Distance::hops: distance is infinite");
  return hops_;
}

std::ostream& operator<<(std::ostream& os, Distance d) {
  if (d.is_finite()) return os << d.hops();
  return os << "inf";
}

NodeSet::NodeSet(std::vector<int> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
}

NodeSet NodeSet::range(int n) {
  std::vector<int> v(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) v[i] = i;
  return NodeSet(std::move(v));
}

bool NodeSet::contains(int i) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), i);
}

NodeSet NodeSet::intersect(const NodeSet& other) const {
  NodeSet out;
  std::set_intersection(nodes_.begin(), nodes_.end(), other.nodes_.begin(), other.nodes_.end(),
                        std::back_inserter(out.nodes_));
  return out;
}

NodeSet NodeSet::unite(const NodeSet& other) const {
  NodeSet out;
  std::set_union(nodes_.begin(), nodes_.end(), other.nodes_.begin(), other.nodes_.end(),
                 std::back_inserter(out.nodes_));
  return out;
}

Graph Graph::from_edges(int n, std::span<const Edge> edges) {
  if (n < 0) throw GraphError("negative node count " + std::to_string(n));
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(n));
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw GraphError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                       ") out of range for n=" + std::to_string(n));
    }
    if (a == b) continue;
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  Graph g;
  g.n_ = n;
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& l = lists[i];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.offsets_[i + 1] = g.offsets_[i] + static_cast<int>(l.size());
  }
  g.adjacency_.reserve(g.offsets_.back());
  for (const auto& l : lists) g.adjacency_.insert(g.adjacency_.end(), l.begin(), l.end());
  return g;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d(n_);
  for (int i = 0; i < n_; ++i) d[i] = degree(i);
  return d;
}

int Graph::max_degree() const {
  int m = 0;
  for (int i = 0; i < n_; ++i) m = std::max(m, degree(i));
  return m;
}

bool Graph::has_edge(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (int i = 0; i < n_; ++i)
    for (int j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

Graph Graph::induced(const NodeSet& keep) const {
  std::vector<int> index(n_, -1);
  int k = 0;
  for (int i : keep) {
    if (i < 0 || i >= n_) throw GraphError("induced: node " + std::to_string(i) + " out of range");
    index[i] = k++;
  }
  std::vector<Edge> edges;
  for (int i : keep)
    for (int j : neighbors(i))
      if (i < j && index[j] >= 0) edges.emplace_back(index[i], index[j]);
  return from_edges(k, edges);
}

Graph Graph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw GraphError("permuted: permutation size mismatch");
  std::vector<char> seen(n_, 0);
  for (int p : perm) {
    if (p < 0 || p >= n_ || seen[p]) throw GraphError("permuted: not a permutation");
    seen[p] = 1;
  }
  auto edges = edge_list();
  for (auto& [a, b] : edges) {
    a = perm[a];
    b = perm[b];
  }
  return from_edges(n_, edges);
}

BfsWorkspace::BfsWorkspace(int n) : depth_(static_cast<std::size_t>(n), -1) {
  queue_.reserve(static_cast<std::size_t>(n));
}

std::vector<Point2> sample_positions(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts(static_cast<std::size_t>(std::max(n, 0)));
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = u(rng);
  }
  return pts;
}

Graph rgg_from_positions(std::span<const Point2> points, double radius) {
  if (!(radius > 0.0)) throw GraphError("rgg radius must be positive");
  const int n = static_cast<int>(points.size());
  double lo_x = 0, lo_y = 0, hi_x = 1, hi_y = 1;
  for (const auto& p : points) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  const int cells_x = std::clamp(static_cast<int>((hi_x - lo_x) / radius), 1, 4096);
  const int cells_y = std::clamp(static_cast<int>((hi_y - lo_y) / radius), 1, 4096);
  const double wx = (hi_x - lo_x) / cells_x;
  const double wy = (hi_y - lo_y) / cells_y;
  auto cell_of = [&](const Point2& p) {
    const int cx = std::min(cells_x - 1, static_cast<int>((p.x - lo_x) / wx));
    const int cy = std::min(cells_y - 1, static_cast<int>((p.y - lo_y) / wy));
    return std::pair{cx, cy};
  };
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(cells_x) * cells_y);
  for (int i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(points[i]);
    bucket[static_cast<std::size_t>(cy) * cells_x + cx].push_back(i);
  }
  const double r2 = radius * radius;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    const auto [cx, cy] = cell_of(points[i]);
    for (int y = std::max(0, cy - 1); y <= std::min(cells_y - 1, cy + 1); ++y) {
      for (int x = std::max(0, cx - 1); x <= std::min(cells_x - 1, cx + 1); ++x) {
        for (int j : bucket[static_cast<std::size_t>(y) * cells_x + x]) {
          if (j <= i) continue;
          const double dx = points[i].x - points[j].x;
          const double dy = points[i].y - points[j].y;
          if (dx * dx + dy * dy <= r2) edges.emplace_back(i, j);
        }
      }
    }
  }
  return Graph::from_edges(n, edges);
}

double default_rgg_radius(int n) {
  return std::sqrt(5.0 / (std::numbers::pi * n));
}

std::vector<Distance> bfs_distances(const Graph& g, int source) {
  std::vector<Distance> out(g.num_nodes(), Distance::infinite());
  BfsWorkspace ws(g.num_nodes());
  ws.run(g, source, -1, [&](int v, int d) { out[v] = Distance(d); });
  return out;
}

Distance shortest_path_distance(const Graph& g, int i, int j) {
  if (i == j) return Distance(0);
  Distance found = Distance::infinite();
  BfsWorkspace ws(g.num_nodes());
  ws.run(g, i, -1, [&](int v, int d) {
    if (v == j) found = Distance(d);
  });
  return found;
}

NodeSet k_neighborhood(const Graph& g, int i, int k) {
  if (k < 0) throw GraphError("k_neighborhood: negative radius");
  std::vector<int> out;
  BfsWorkspace ws(g.num_nodes());
  ws.run(g, i, k, [&](int v, int) { out.push_back(v); });
  return NodeSet(std::move(out));
}

NodeSet boundary(const Graph& g, int i, int s) {
  if (s < 0) throw GraphError("boundary: negative radius");
  std::vector<int> out;
  BfsWorkspace ws(g.num_nodes());
  ws.run(g, i, s, [&](int v, int d) {
    if (d == s) out.push_back(v);
  });
  return NodeSet(std::move(out));
}

double average_degree(const Graph& g) {
  if (g.num_nodes() < 1) throw GraphError("average_degree: empty graph");
  return 2.0 * static_cast<double>(g.num_edges()) / g.num_nodes();
}

PathLengthSummary path_length_summary(const Graph& g, int jobs) {
  const int n = g.num_nodes();
  if (n < 2) throw GraphError("average_path_length: need at least 2 nodes");
  std::vector<std::uint64_t> sum(n, 0), count(n, 0);
  const int workers = std::max(1, std::min(jobs, n));
  const int chunk = (n + workers - 1) / workers;
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    BfsWorkspace ws(n);
    const int begin = static_cast<int>(w) * chunk;
    const int end = std::min(n, begin + chunk);
    for (int s = begin; s < end; ++s) {
      ws.run(g, s, -1, [&](int, int d) {
        sum[s] += static_cast<std::uint64_t>(d);
        count[s] += d > 0 ? 1 : 0;
      });
    }
  });
  PathLengthSummary out;
  std::uint64_t total = 0;
  for (int s = 0; s < n; ++s) {
    total += sum[s];
    out.connected_pairs += count[s];
  }
  const auto all = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1);
  out.disconnected_pairs = all - out.connected_pairs;
  if (out.connected_pairs == 0) throw GraphError("average_path_length: no connected pair");
  out.mean = static_cast<double>(total) / static_cast<double>(out.connected_pairs);
  return out;
}

double average_path_length(const Graph& g, int jobs) {
  return path_length_summary(g, jobs).mean;
}

GraphStats graph_stats(const Graph& g, int jobs) {
  GraphStats s;
  s.n = g.num_nodes();
  s.edge_count = g.num_edges();
  s.avg_degree = average_degree(g);
  s.max_degree = g.max_degree();
  const auto apl = path_length_summary(g, jobs);
  s.avg_path_length = apl.mean;
  s.connected_pairs = apl.connected_pairs;
  s.disconnected_pairs = apl.disconnected_pairs;
  return s;
}

Graph read_edge_list_csv(const std::string& path, int n) {
  csv::Table t;
  if (!csv::read_table(path, t)) throw GraphError("cannot open edge file: " + path);
  if (t.header.size() != 2 || t.header[0] != "src" || t.header[1] != "dst") {
    throw GraphError(path + ": expected header 'src,dst'");
  }
  std::vector<Edge> edges;
  long long max_id = -1;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    long long a = 0, b = 0;
    if (row.size() != 2 || !csv::parse_int(row[0], a) || !csv::parse_int(row[1], b) || a < 0 || b < 0 ||
        a > INT32_MAX || b > INT32_MAX) {
      throw GraphError(path + ":" + std::to_string(t.line_numbers[r]) + ": bad edge row");
    }
    max_id = std::max({max_id, a, b});
    edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  return Graph::from_edges(n >= 0 ? n : static_cast<int>(max_id + 1), edges);
}

}  // namespace netdid
