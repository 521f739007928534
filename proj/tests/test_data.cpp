#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "netdid/dataset.hpp"
#include "netdid/exposure.hpp"
#include "netdid/features.hpp"
#include "test_util.hpp"

using namespace netdid;

namespace {

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kEdges = "src,dst\na,b\nb,c\nc,d\n";

// Loads and returns the error, failing the test if nothing was thrown.
DataError load_error(const std::string& nodes, const std::string& edges = kEdges) {
  write("td_nodes.csv", nodes);
  write("td_edges.csv", edges);
  try {
    load_panel("td_nodes.csv", "td_edges.csv");
  } catch (const DataError& e) {
    return e;
  }
  FAIL("expected a DataError");
  return DataError(DataError::Kind::Invalid, "");
}

}  // namespace

TEST_CASE("load a small panel") {
  write("td_nodes.csv", "id,d,y_pre,y_post,x1\na,1,1.0,2.0,0.5\nb,0,1.5,1.0,0.25\nc,1,0,0,1\nd,0,2,3,0\n");
  write("td_edges.csv", kEdges);
  const auto d = load_panel("td_nodes.csv", "td_edges.csv");
  CHECK(d.n() == 4);
  CHECK(d.graph.num_edges() == 3);
  CHECK(d.D == std::vector<int>{1, 0, 1, 0});
  CHECK(d.X(1, 0) == 0.25);
  CHECK(d.ids == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(d.covariate_names == std::vector<std::string>{"x1"});
  const auto dy = delta_y(d);
  CHECK(dy[0] == 1.0);
  CHECK(dy[1] == -0.5);
}

TEST_CASE("ids map in first-seen order") {
  write("td_nodes.csv", "id,d,y_pre,y_post,x1\n17,1,1,2,0\n03,0,1,1,0\n");
  write("td_edges.csv", "src,dst\n03,17\n");
  const auto d = load_panel("td_nodes.csv", "td_edges.csv");
  CHECK(d.ids == std::vector<std::string>{"17", "03"});
  CHECK(d.graph.has_edge(0, 1));
}

TEST_CASE("each corruption has its own diagnostic") {
  const std::string head = "id,d,y_pre,y_post,x1\n";
  auto e = load_error(head + "a,1,1,2,0\nb,2,1,1,0\nc,0,0,0,1\nd,0,2,3,0\n");
  CHECK(e.kind() == DataError::Kind::NonBinary);
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  CHECK(std::string(e.what()).find("'d'") != std::string::npos);

  e = load_error(head + "a,1,1,2,0\nb,0,1,,0\nc,0,0,0,1\nd,0,2,3,0\n");
  CHECK(e.kind() == DataError::Kind::Missing);
  e = load_error(head + "a,1,1,2,0\nb,0,1,NaN,0\nc,0,0,0,1\nd,0,2,3,0\n");
  CHECK(e.kind() == DataError::Kind::Missing);
  e = load_error(head + "a,1,1,2,0\nb,0,1,abc,0\nc,0,0,0,1\nd,0,2,3,0\n");
  CHECK(e.kind() == DataError::Kind::NonNumeric);
  e = load_error(head + "a,1,1,2,0\nb,0,1,1\nc,0,0,0,1\nd,0,2,3,0\n");
  CHECK(e.kind() == DataError::Kind::LengthMismatch);
  e = load_error("id,y_pre,d,y_post,x1\na,1,1,2,0\n");
  CHECK(e.kind() == DataError::Kind::Header);
  e = load_error(head + "a,1,1,2,0\nb,0,1,1,0\nc,0,0,0,1\nd,0,2,3,0\n", "src,dst\na,z\n");
  CHECK(e.kind() == DataError::Kind::BadNodeId);
  e = load_error(head + "a,1,1,2,0\na,0,1,1,0\n");
  CHECK(e.kind() == DataError::Kind::BadNodeId);
  e = load_error(head + "a,1,1,2,0\n", "from,to\n");
  CHECK(e.kind() == DataError::Kind::Header);

  try {
    load_panel("missing_nodes.csv", "td_edges.csv");
    FAIL("expected throw");
  } catch (const DataError& err) {
    CHECK(err.kind() == DataError::Kind::Io);
    CHECK(std::string(err.what()).find("missing_nodes.csv") != std::string::npos);
  }
}

TEST_CASE("fuzzed corruptions are rejected") {
  const std::string good = "id,d,y_pre,y_post,x1\na,1,1,2,0.5\nb,0,1.5,1,0.25\nc,1,0,0,1\nd,0,2,3,0\n";
  std::mt19937_64 rng(3);
  int rejected = 0, total = 0;
  for (int rep = 0; rep < 60; ++rep) {
    std::string bad = good;
    const int kind = rep % 3;
    if (kind == 0) {
      // non-numeric cell
      const auto pos = bad.find(',', bad.find('\n') + 1 + (rng() % 40));
      if (pos == std::string::npos) continue;
      bad.insert(pos + 1, "q");
    } else if (kind == 1) {
      // truncated row
      const auto last = bad.rfind(',');
      bad = bad.substr(0, last) + "\n";
    } else {
      // swap the header columns
      bad.replace(0, std::string("id,d,y_pre").size(), "id,y_pre,d");
    }
    ++total;
    write("td_nodes.csv", bad);
    write("td_edges.csv", kEdges);
    try {
      load_panel("td_nodes.csv", "td_edges.csv");
    } catch (const DataError&) {
      ++rejected;
    }
  }
  CHECK(rejected == total);
}

TEST_CASE("panel round trip") {
  std::mt19937_64 rng(5);
  PanelDataset d;
  d.graph = testutil::random_graph(30, 0.1, rng);
  d.X = Eigen::MatrixXd::Random(30, 2);
  d.D.resize(30);
  for (auto& v : d.D) v = static_cast<int>(rng() % 2);
  d.y_pre = Eigen::VectorXd::Random(30);
  d.y_post = Eigen::VectorXd::Random(30);
  d.validate();
  save_panel(d, "td_rt_nodes.csv", "td_rt_edges.csv");
  const auto e = load_panel("td_rt_nodes.csv", "td_rt_edges.csv");
  CHECK(e.n() == d.n());
  CHECK(e.graph.edge_list() == d.graph.edge_list());
  CHECK(e.D == d.D);
  CHECK(e.X == d.X);
  CHECK(e.y_pre == d.y_pre);
  CHECK(e.y_post == d.y_post);
  CHECK(e.ids == d.ids);
  CHECK(e.covariate_names == d.covariate_names);
}

TEST_CASE("rcs round trip and wave check") {
  RcsDataset d;
  d.graph = testutil::path_graph(4);
  d.X = Eigen::MatrixXd::Zero(4, 1);
  d.D = {1, 0, 1, 0};
  d.T = {0, 0, 1, 1};
  d.y = Eigen::VectorXd::LinSpaced(4, 0, 3);
  d.validate();
  save_rcs(d, "td_rcs_nodes.csv", "td_rcs_edges.csv");
  const auto e = load_rcs("td_rcs_nodes.csv", "td_rcs_edges.csv");
  CHECK(e.T == d.T);
  CHECK(e.y == d.y);
  d.T = {0, 0, 0, 0};
  CHECK_THROWS_AS(d.validate(), DataError);
}

TEST_CASE("staggered round trip and never-treated requirement") {
  StaggeredPanel s;
  s.graph = testutil::path_graph(3);
  s.X = Eigen::MatrixXd::Zero(3, 1);
  s.adopt_time = {2, StaggeredPanel::kNever, 3};
  s.Y = Eigen::MatrixXd::Random(3, 3);
  s.validate();
  save_staggered(s, "td_st_nodes.csv", "td_st_edges.csv");
  const auto e = load_staggered("td_st_nodes.csv", "td_st_edges.csv");
  CHECK(e.adopt_time == s.adopt_time);
  CHECK(e.Y == s.Y);
  CHECK(e.treated_at(0, 2));
  CHECK_FALSE(e.treated_at(0, 1));
  CHECK_FALSE(e.treated_at(1, 3));
  s.adopt_time = {1, 2, 3};
  CHECK_THROWS_AS(s.validate(), DataError);
}

TEST_CASE("delta_y") {
  PanelDataset d;
  d.graph = Graph::from_edges(2, {});
  d.X = Eigen::MatrixXd::Zero(2, 1);
  d.D = {1, 0};
  d.y_pre = Eigen::Vector2d(1, 2);
  d.y_post = Eigen::Vector2d(3, 2);
  CHECK(delta_y(d) == Eigen::Vector2d(2, 0));
  d.y_post = d.y_pre;
  CHECK(delta_y(d).isZero(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  d.y_pre = Eigen::Vector2d(z(rng), z(rng));
  d.y_post = Eigen::Vector2d(z(rng), z(rng));
  const auto dy = delta_y(d);
  for (int i = 0; i < 2; ++i) CHECK(dy[i] == d.y_post[i] - d.y_pre[i]);
}

// ------------------------------------------------------------------ exposure

TEST_CASE("exposure count and any") {
  std::vector<Edge> star;
  for (int j = 1; j <= 4; ++j) star.emplace_back(0, j);
  const Graph g = Graph::from_edges(6, star);
  const std::vector<int> D{0, 1, 1, 1, 0, 1};
  CHECK(exposure_count(g, D, 0) == 3);
  CHECK(exposure_count(g, D, 5) == 0);
  CHECK(exposure_any(g, D, 1) == 0);
  const std::vector<int> D2{1, 0, 0, 0, 0, 0};
  CHECK(exposure_any(g, D2, 1) == 1);
  CHECK(exposure_any(g, std::vector<int>(6, 0), 0) == 0);
}

TEST_CASE("exposure matches the dense product oracle") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 50;
    const Graph g = testutil::random_graph(n, 0.08, rng);
    std::vector<int> D(n);
    for (auto& v : D) v = static_cast<int>(rng() % 2);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [i, j] : g.edge_list()) A(i, j) = A(j, i) = 1;
    Eigen::VectorXd Dv(n);
    for (int i = 0; i < n; ++i) Dv[i] = D[i];
    const Eigen::VectorXd AD = A * Dv;
    const auto cnt = compute_exposure(g, D, {ExposureKind::Count, 1000});
    const auto any = compute_exposure(g, D, {ExposureKind::Any, 3});
    const auto cap = compute_exposure(g, D, {ExposureKind::Count, 2});
    for (int i = 0; i < n; ++i) {
      CHECK(cnt.G[i] == static_cast<int>(AD[i]));
      CHECK(any.G[i] == (AD[i] > 0 ? 1 : 0));
      CHECK(cap.G[i] == std::min(2, static_cast<int>(AD[i])));
    }
    CHECK(cap.levels == std::vector<int>{0, 1, 2});
    CHECK(any.levels == std::vector<int>{0, 1});

    // editing treatments outside N(i, 1) leaves G_i alone
    const int i = static_cast<int>(rng() % n);
    const auto near = k_neighborhood(g, i, 1);
    std::vector<int> D3 = D;
    for (int j = 0; j < n; ++j)
      if (!near.contains(j)) D3[j] = 1 - D3[j];
    CHECK(exposure_count(g, D3, i) == exposure_count(g, D, i));
  }
}

TEST_CASE("neighbor mean covariates") {
  const Graph g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {0, 2}});
  Eigen::MatrixXd X(4, 1);
  X << 9, 0.2, 0.6, 5;
  CHECK(neighbor_mean_covariates(g, X, 0)[0] == doctest::Approx(0.4));
  CHECK(neighbor_mean_covariates(g, X, 3)[0] == 0.0);
  CHECK(isolated_count(g) == 1);

  std::mt19937_64 rng(12);
  const Graph h = testutil::random_graph(40, 0.1, rng);
  const Eigen::MatrixXd Y = Eigen::MatrixXd::Random(40, 3);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(40, 40);
  for (int i = 0; i < 40; ++i)
    for (int j : h.neighbors(i)) W(i, j) = 1.0 / h.degree(i);
  const Eigen::MatrixXd oracle = W * Y;
  CHECK((neighbor_means(h, Y) - oracle).cwiseAbs().maxCoeff() < 1e-14);
}

// ------------------------------------------------------------------ features

TEST_CASE("feature layout") {
  const Graph g = testutil::path_graph(3);
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 4;
  const auto f = build_features(g, X, 1, 1);
  REQUIRE(f.F.cols() == 4);
  CHECK(f.names[0] == "1");
  // node 1: x = 2, neighbor mean (1 + 4) / 2, degree 2
  CHECK(f.F(1, 0) == 1.0);
  CHECK(f.F(1, 1) == 2.0);
  CHECK(f.F(1, 2) == 2.5);
  CHECK(f.F(1, 3) == 2.0);
  CHECK(feature_count(1, 1, 1) == 4);
  // squares and pairwise products of the 3 base columns
  const auto f2 = build_features(g, X, 1, 2);
  CHECK(f2.F.cols() == 4 + 6);
  CHECK(feature_count(1, 1, 2) == 10);
  CHECK(feature_count(1, 1, 3) == 20);
  CHECK(f2.F(1, 4) == 4.0);        // x * x
  CHECK(f2.F(1, 5) == 5.0);        // x * neighbor mean
  // ring at distance 2 from node 0 is {2}
  const auto f3 = build_features(g, X, 2, 1);
  CHECK(f3.F.cols() == 5);
  CHECK(f3.F(0, 4) == 4.0);
  CHECK(f3.F(1, 4) == 0.0);
  for (int p = 1; p <= 3; ++p)
    for (int L = 1; L <= 3; ++L)
      for (int deg = 1; deg <= 3; ++deg) {
        const auto ff = build_features(g, Eigen::MatrixXd::Random(3, p), L, deg);
        CHECK(static_cast<std::size_t>(ff.F.cols()) == feature_count(p, L, deg));
        CHECK(ff.names.size() == static_cast<std::size_t>(ff.F.cols()));
        CHECK(ff.F.allFinite());
      }
}
