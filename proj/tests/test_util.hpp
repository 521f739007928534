#pragma once

#include <limits>
#include <random>
#include <vector>

#include "netdid/graph.hpp"

namespace testutil {

// Erdos-Renyi graph for property tests.
inline netdid::Graph random_graph(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<netdid::Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return netdid::Graph::from_edges(n, e);
}

// All-pairs distances by Floyd-Warshall on the dense adjacency matrix;
// unreachable pairs hold a large sentinel.
constexpr int kFar = std::numeric_limits<int>::max() / 4;
inline std::vector<std::vector<int>> floyd_warshall(const netdid::Graph& g) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kFar));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (int j : g.neighbors(i)) d[i][j] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline netdid::Graph path_graph(int n) {
  std::vector<netdid::Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return netdid::Graph::from_edges(n, e);
}

inline netdid::Graph complete_graph(int n) {
  std::vector<netdid::Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return netdid::Graph::from_edges(n, e);
}

}  // namespace testutil
