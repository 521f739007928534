#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "netdid/graph.hpp"
#include "test_util.hpp"

using namespace netdid;
using testutil::kFar;

TEST_CASE("from_edges dedups, symmetrizes and drops self-loops") {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {1, 1}};
  const Graph g = Graph::from_edges(3, e);
  CHECK(g.num_edges() == 1);
  CHECK(g.degrees() == std::vector<int>{1, 1, 0});
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(1, 1));
}

TEST_CASE("from_edges small cases") {
  CHECK(Graph::from_edges(2, {}).degrees() == std::vector<int>{0, 0});
  CHECK(testutil::path_graph(4).degrees() == std::vector<int>{1, 2, 2, 1});
}

TEST_CASE("from_edges rejects bad input") {
  const std::vector<Edge> bad{{0, 3}};
  CHECK_THROWS_AS(Graph::from_edges(3, bad), GraphError);
  const std::vector<Edge> neg{{-1, 0}};
  CHECK_THROWS_AS(Graph::from_edges(3, neg), GraphError);
  CHECK_THROWS_AS(Graph::from_edges(-1, {}), GraphError);
}

TEST_CASE("graph invariants on random graphs") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Graph g = testutil::random_graph(40, 0.1, rng);
    int sum = 0;
    for (int i = 0; i < g.num_nodes(); ++i) {
      sum += g.degree(i);
      for (int j : g.neighbors(i)) {
        CHECK(j != i);
        CHECK(g.has_edge(j, i));
      }
    }
    CHECK(static_cast<std::size_t>(sum) == 2 * g.num_edges());
  }
}

TEST_CASE("Distance sentinel") {
  const Distance inf = Distance::infinite();
  CHECK_FALSE(inf.is_finite());
  CHECK_THROWS((void)inf.hops());
  CHECK(Distance(3) < inf);
  CHECK(Distance(3).hops() == 3);
}

TEST_CASE("NodeSet is sorted and unique") {
  const NodeSet s(std::vector<int>{5, 1, 3, 1});
  CHECK(std::vector<int>(s.begin(), s.end()) == std::vector<int>{1, 3, 5});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(2));
  const NodeSet t(std::vector<int>{3, 4});
  CHECK(s.intersect(t) == NodeSet(std::vector<int>{3}));
  CHECK(s.unite(t).size() == 4);
}

TEST_CASE("sample_positions") {
  const auto p = sample_positions(5, 7);
  REQUIRE(p.size() == 5);
  for (const auto& q : p) {
    CHECK(q.x >= 0.0);
    CHECK(q.x <= 1.0);
    CHECK(q.y >= 0.0);
    CHECK(q.y <= 1.0);
  }
  const auto p2 = sample_positions(5, 7);
  for (int i = 0; i < 5; ++i) {
    CHECK(p[i].x == p2[i].x);
    CHECK(p[i].y == p2[i].y);
  }
  const auto big = sample_positions(10000, 1);
  double mx = 0, my = 0;
  for (const auto& q : big) {
    mx += q.x;
    my += q.y;
  }
  CHECK(std::abs(mx / 1e4 - 0.5) < 0.02);
  CHECK(std::abs(my / 1e4 - 0.5) < 0.02);
}

TEST_CASE("rgg edges") {
  const std::vector<Point2> close{{0, 0}, {0.05, 0}};
  CHECK(rgg_from_positions(close, 0.1).has_edge(0, 1));
  const std::vector<Point2> far{{0, 0}, {1, 1}};
  CHECK(rgg_from_positions(far, 0.1).num_edges() == 0);
}

TEST_CASE("rgg matches brute-force pair test") {
  const auto pts = sample_positions(400, 3);
  const double r = 0.07;
  const Graph g = rgg_from_positions(pts, r);
  std::size_t edges = 0;
  for (int i = 0; i < 400; ++i)
    for (int j = i + 1; j < 400; ++j) {
      const bool near = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= r;
      edges += near;
      CHECK(g.has_edge(i, j) == near);
    }
  CHECK(edges == g.num_edges());
}

TEST_CASE("rgg mean degree at the default radius") {
  const int n = 2000;
  const auto pts = sample_positions(n, 5);
  const double r = default_rgg_radius(n);
  CHECK(r == doctest::Approx(std::sqrt(5.0 / (M_PI * n))));
  // direct pair count
  std::size_t pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs += std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= r;
  const double deg = 2.0 * static_cast<double>(pairs) / n;
  CHECK(average_degree(rgg_from_positions(pts, r)) == doctest::Approx(deg));
  CHECK(std::abs(deg - 5.0) <= 0.6);
}

TEST_CASE("rgg is invariant to point order") {
  auto pts = sample_positions(300, 9);
  const Graph g = rgg_from_positions(pts, 0.08);
  std::vector<int> perm(300);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point2> moved(300);
  for (int i = 0; i < 300; ++i) moved[perm[i]] = pts[i];
  const Graph h = rgg_from_positions(moved, 0.08);
  CHECK(h.edge_list() == g.permuted(perm).edge_list());
}

TEST_CASE("shortest paths") {
  const Graph p3 = testutil::path_graph(3);
  CHECK(shortest_path_distance(p3, 1, 1) == Distance(0));
  CHECK(shortest_path_distance(p3, 0, 2) == Distance(2));
  CHECK_FALSE(shortest_path_distance(Graph::from_edges(2, {}), 0, 1).is_finite());
}

TEST_CASE("neighborhoods and boundaries") {
  const Graph p3 = testutil::path_graph(3);
  CHECK(k_neighborhood(p3, 1, 0) == NodeSet(std::vector<int>{1}));
  CHECK(boundary(p3, 0, 0) == NodeSet(std::vector<int>{0}));
  CHECK(boundary(p3, 0, 2) == NodeSet(std::vector<int>{2}));
  std::vector<Edge> star;
  for (int j = 1; j < 6; ++j) star.emplace_back(0, j);
  CHECK(k_neighborhood(Graph::from_edges(6, star), 0, 1).size() == 6);
}

TEST_CASE("distances agree with the all-pairs oracle") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 8; ++rep) {
    const int n = 30 + 20 * rep;
    const Graph g = testutil::random_graph(n, 2.0 / n, rng);
    const auto fw = testutil::floyd_warshall(g);
    for (int i = 0; i < n; ++i) {
      const auto d = bfs_distances(g, i);
      for (int j = 0; j < n; ++j) {
        if (fw[i][j] == kFar) {
          CHECK_FALSE(d[j].is_finite());
        } else {
          REQUIRE(d[j].is_finite());
          CHECK(d[j].hops() == fw[i][j]);
          // metric properties
          CHECK(fw[i][j] == fw[j][i]);
          CHECK((fw[i][j] == 0) == (i == j));
          for (int k = 0; k < n; k += 7)
            if (fw[i][k] != kFar) CHECK(fw[i][j] <= fw[i][k] + fw[k][j]);
        }
      }
      for (int K : {0, 1, 3}) {
        std::vector<int> want, ring;
        for (int j = 0; j < n; ++j) {
          if (fw[i][j] <= K) want.push_back(j);
          if (fw[i][j] == K) ring.push_back(j);
        }
        CHECK(k_neighborhood(g, i, K) == NodeSet(want));
        CHECK(boundary(g, i, K) == NodeSet(ring));
      }
    }
  }
}

TEST_CASE("boundaries partition the component and build neighborhoods") {
  std::mt19937_64 rng(8);
  const Graph g = testutil::random_graph(60, 0.05, rng);
  for (int i = 0; i < 60; i += 5) {
    NodeSet acc;
    std::size_t total = 0;
    for (int s = 0; s < 60; ++s) {
      const NodeSet b = boundary(g, i, s);
      CHECK(acc.intersect(b).empty());
      acc = acc.unite(b);
      total += b.size();
      CHECK(acc == k_neighborhood(g, i, s));
    }
    CHECK(total == k_neighborhood(g, i, 60).size());
  }
}

TEST_CASE("average degree and path length") {
  const Graph tri = testutil::complete_graph(3);
  CHECK(average_degree(tri) == 2.0);
  CHECK(average_degree(Graph::from_edges(5, {})) == 0.0);
  CHECK(average_degree(testutil::path_graph(4)) == 1.5);
  CHECK(average_path_length(testutil::path_graph(3)) == doctest::Approx(4.0 / 3.0));
  CHECK(average_path_length(testutil::path_graph(4)) == doctest::Approx(10.0 / 6.0));
  CHECK(average_path_length(testutil::complete_graph(7)) == 1.0);
  CHECK(average_path_length(tri) == 1.0);
  CHECK_THROWS_AS(average_path_length(Graph::from_edges(4, {})), GraphError);
}

TEST_CASE("path length excludes disconnected pairs and matches the oracle") {
  std::mt19937_64 rng(21);
  const Graph g = testutil::random_graph(80, 0.03, rng);
  const auto fw = testutil::floyd_warshall(g);
  double sum = 0;
  std::uint64_t cnt = 0, gap = 0;
  for (int i = 0; i < 80; ++i)
    for (int j = 0; j < 80; ++j) {
      if (i == j) continue;
      if (fw[i][j] == kFar) {
        ++gap;
      } else {
        sum += fw[i][j];
        ++cnt;
      }
    }
  const auto s = path_length_summary(g, 3);
  CHECK(s.connected_pairs == cnt);
  CHECK(s.disconnected_pairs == gap);
  CHECK(s.mean == doctest::Approx(sum / static_cast<double>(cnt)).epsilon(1e-12));
  CHECK(path_length_summary(g, 1).mean == s.mean);
}

TEST_CASE("induced subgraph relabels in order") {
  const Graph p = testutil::path_graph(5);
  const Graph h = p.induced(NodeSet(std::vector<int>{1, 2, 4}));
  CHECK(h.num_nodes() == 3);
  CHECK(h.has_edge(0, 1));
  CHECK(h.num_edges() == 1);
}

TEST_CASE("edge list CSV") {
  const std::string path = "test_graph_edges.csv";
  {
    std::ofstream out(path);
    out << "src,dst\n0,1\n1,2\n2,3\n";
  }
  const Graph g = read_edge_list_csv(path);
  CHECK(g.num_nodes() == 4);
  CHECK(g.degrees() == std::vector<int>{1, 2, 2, 1});
  CHECK(read_edge_list_csv(path, 6).num_nodes() == 6);
  {
    std::ofstream out(path);
    out << "from,to\n0,1\n";
  }
  CHECK_THROWS(read_edge_list_csv(path));
  {
    std::ofstream out(path);
    out << "src,dst\n0,x\n";
  }
  CHECK_THROWS(read_edge_list_csv(path));
  std::remove(path.c_str());
  CHECK_THROWS(read_edge_list_csv("no_such_file.csv"));
}

TEST_CASE("graph stats") {
  const auto s = graph_stats(testutil::path_graph(4));
  CHECK(s.n == 4);
  CHECK(s.edge_count == 3);
  CHECK(s.max_degree == 2);
  CHECK(s.avg_degree == 1.5);
  CHECK(s.avg_path_length == doctest::Approx(10.0 / 6.0));
}
