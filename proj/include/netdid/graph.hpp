#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netdid {

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Graph distance with a dedicated unreachable state. Arithmetic on an
// infinite distance throws instead of producing a large number.
class Distance {
 public:
  constexpr Distance() = default;
  constexpr explicit Distance(int hops) : hops_(hops) {}
  static constexpr Distance infinite() { return Distance(kInfinite, 0); }

  [[nodiscard]] constexpr bool is_finite() const { return hops_ != kInfinite; }
  [[nodiscard]] int hops() const;

  friend constexpr bool operator==(Distance a, Distance b) = default;
  friend constexpr std::strong_ordering operator<=>(Distance a, Distance b) {
    if (a.is_finite() != b.is_finite()) {
      return a.is_finite() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return a.hops_ <=> b.hops_;
  }

 private:
  static constexpr int kInfinite = -1;
  constexpr Distance(int raw, int /*tag*/) : hops_(raw) {}
  int hops_ = 0;
};

std::ostream& operator<<(std::ostream& os, Distance d);

// Strictly increasing set of node indices.
class NodeSet {
 public:
  NodeSet() = default;
  // Sorts and deduplicates.
  explicit NodeSet(std::vector<int> nodes);
  static NodeSet range(int n);

  [[nodiscard]] std::span<const int> nodes() const { return nodes_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool empty() const { return nodes_.empty(); }
  [[nodiscard]] bool contains(int i) const;
  [[nodiscard]] auto begin() const { return nodes_.begin(); }
  [[nodiscard]] auto end() const { return nodes_.end(); }

  [[nodiscard]] NodeSet intersect(const NodeSet& other) const;
  [[nodiscard]] NodeSet unite(const NodeSet& other) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<int> nodes_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Edge = std::pair<int, int>;

// Undirected simple graph in compressed sparse row form. Immutable after
// construction; neighbor lists are sorted.
class Graph {
 public:
  Graph() = default;

  // Deduplicates, symmetrizes and drops self-loops.
  static Graph from_edges(int n, std::span<const Edge> edges);

  [[nodiscard]] int num_nodes() const { return n_; }
  [[nodiscard]] std::size_t num_edges() const { return adjacency_.size() / 2; }
  [[nodiscard]] int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }
  [[nodiscard]] std::vector<int> degrees() const;
  [[nodiscard]] int max_degree() const;
  [[nodiscard]] std::span<const int> neighbors(int i) const {
    return {adjacency_.data() + offsets_[i], static_cast<std::size_t>(degree(i))};
  }
  [[nodiscard]] bool has_edge(int i, int j) const;
  [[nodiscard]] std::vector<Edge> edge_list() const;

  // Subgraph induced by `keep`, relabeled to 0..keep.size()-1 in order.
  [[nodiscard]] Graph induced(const NodeSet& keep) const;
  // Relabels node i as perm[i].
  [[nodiscard]] Graph permuted(std::span<const int> perm) const;

 private:
  int n_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> adjacency_;
};

// Reusable breadth-first search state; one per thread.
class BfsWorkspace {
 public:
  explicit BfsWorkspace(int n);

  // Visits every node within `max_depth` hops of `source` (all reachable
  // nodes when max_depth < 0), calling visit(node, depth) in BFS order.
  template <class Visit>
  void run(const Graph& g, int source, int max_depth, Visit&& visit);

 private:
  std::vector<int> depth_;
  std::vector<int> queue_;
};

template <class Visit>
void BfsWorkspace::run(const Graph& g, int source, int max_depth, Visit&& visit) {
  queue_.clear();
  queue_.push_back(source);
  depth_[source] = 0;
  for (std::size_t head = 0; head < queue_.size(); ++head) {
    const int u = queue_[head];
    const int du = depth_[u];
    visit(u, du);
    if (max_depth >= 0 && du == max_depth) continue;
    for (int v : g.neighbors(u)) {
      if (depth_[v] < 0) {
        depth_[v] = du + 1;
        queue_.push_back(v);
      }
    }
  }
  for (int u : queue_) depth_[u] = -1;
}

std::vector<Point2> sample_positions(int n, std::uint64_t seed);
Graph rgg_from_positions(std::span<const Point2> points, double radius);
// Connectivity radius sqrt(5 / (pi n)) giving expected interior degree 5.
double default_rgg_radius(int n);

Distance shortest_path_distance(const Graph& g, int i, int j);
// Distances from `source` to every node.
std::vector<Distance> bfs_distances(const Graph& g, int source);
NodeSet k_neighborhood(const Graph& g, int i, int k);
NodeSet boundary(const Graph& g, int i, int s);

double average_degree(const Graph& g);

struct PathLengthSummary {
  double mean = 0.0;
  std::uint64_t connected_pairs = 0;     // ordered pairs i != j with a path
  std::uint64_t disconnected_pairs = 0;  // ordered pairs i != j without one
};

// Mean shortest-path length over connected ordered pairs; pairs with no path
// are excluded. Throws GraphError when no pair is connected.
PathLengthSummary path_length_summary(const Graph& g, int jobs = 1);
double average_path_length(const Graph& g, int jobs = 1);

struct GraphStats {
  int n = 0;
  std::size_t edge_count = 0;
  double avg_degree = 0.0;
  double avg_path_length = 0.0;
  int max_degree = 0;
  std::uint64_t connected_pairs = 0;
  std::uint64_t disconnected_pairs = 0;
};

GraphStats graph_stats(const Graph& g, int jobs = 1);

// Edge-list CSV with header `src,dst` and zero-based integer ids. When
// n < 0 the node count is one past the largest id.
Graph read_edge_list_csv(const std::string& path, int n = -1);

}  // namespace netdid
