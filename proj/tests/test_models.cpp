#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netdid/errors.hpp"
#include "netdid/glm.hpp"
#include "netdid/gnn.hpp"
#include "netdid/nuisance.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace netdid;
using namespace testoracle;


TEST_CASE("sigmoid and log1pexp are stable") {
  CHECK(sigmoid(0) == 0.5);
  CHECK(sigmoid(800) == 1.0);
  CHECK(sigmoid(-800) == 0.0);
  CHECK(log1pexp(800) == 800.0);
  CHECK(log1pexp(0) == doctest::Approx(std::log(2.0)));
  CHECK(std::isfinite(log1pexp(-800)));
}

TEST_CASE("logistic fit matches a long-run gradient descent oracle") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = logit_problem(rng, 300, 4);
    GlmOptions opt;
    opt.ridge = 1e-3;
    const auto fit = fit_logistic(p.F, p.y, p.mask, opt);
    CHECK(fit.converged);
    const auto w_gd = gd_logistic(p, opt.ridge, 200000);
    const long double j_fit = logit_loss(p, fit.weights, opt.ridge);
    const long double j_gd = logit_loss(p, w_gd, opt.ridge);
    CHECK(std::fabs(static_cast<double>(j_fit - j_gd)) <= 1e-6);
    CHECK(j_fit <= j_gd + 1e-9);
    CHECK(logistic_objective(p.F, p.y, p.mask, fit.weights, opt.ridge) ==
          doctest::Approx(static_cast<double>(j_fit)).epsilon(1e-12));
    const auto pr = fit.predict(p.F);
    CHECK(pr.minCoeff() > 0.0);
    CHECK(pr.maxCoeff() < 1.0);
  }
}

TEST_CASE("logistic fit rejects degenerate labels") {
  const Eigen::MatrixXd F = Eigen::MatrixXd::Ones(5, 1);
  const std::vector<int> y(5, 1);
  CHECK_THROWS_AS(fit_logistic(F, y, NodeSet::range(5)), EstimationError);
  CHECK_THROWS_AS(fit_logistic(F, y, NodeSet{}), EstimationError);
}

TEST_CASE("least squares matches the orthogonal-decomposition solve") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 150, q = 6;
    Eigen::MatrixXd F(n, q);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      F(i, 0) = 1;
      for (int k = 1; k < q; ++k) F(i, k) = z(rng) * std::pow(10.0, k - 3);
      y[i] = z(rng);
    }
    std::vector<int> keep;
    for (int i = 0; i < n; i += 2) keep.push_back(i);
    const NodeSet mask(keep);
    const double ridge = rep == 0 ? 0.0 : 1e-4;
    GlmOptions opt;
    opt.ridge = ridge;
    const auto fit = fit_least_squares(F, y, mask, opt);
    // augmented system [F_m; sqrt(ridge) E] w = [y_m; 0]
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + q - 1, q);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m + q - 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      A.row(r) = F.row(keep[r]);
      b[r] = y[keep[r]];
    }
    for (int k = 1; k < q; ++k) A(m + k - 1, k) = std::sqrt(ridge);
    const Eigen::VectorXd w = A.completeOrthogonalDecomposition().solve(b);
    CHECK((fit.weights - w).norm() <= 1e-8 * std::max(1.0, w.norm()));
  }
}

TEST_CASE("least squares without ridge on a rank-deficient design throws") {
  Eigen::MatrixXd F(4, 3);
  F << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
  GlmOptions opt;
  opt.ridge = 0;
  CHECK_THROWS_AS(fit_least_squares(F, Eigen::VectorXd::Ones(4), NodeSet::range(4), opt), EstimationError);
}

// ---------------------------------------------------------------------- GNN


TEST_CASE("GNN forward agrees with the long-double oracle") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 12;
    const Graph g = testutil::random_graph(n, 0.25, rng);
    const Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 2);
    const auto agg = rep % 2 ? Aggregation::Mean : Aggregation::Pna;
    const auto p = GnnParams::glorot(2, 1 + rep % 3, 1 + rep % 5, agg, rng());
    const auto f = gnn_forward(p, g, X);
    const auto o = oracle_forward(p, g, X, p.flatten());
    for (int i = 0; i < n; ++i) CHECK(std::fabs(f[i] - static_cast<double>(o[i])) < 1e-12);
  }
}

TEST_CASE("GNN analytic gradients match central differences on 100 configurations") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  int checked = 0;
  double worst = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 6 + static_cast<int>(rng() % 10);
    const int in = 1 + static_cast<int>(rng() % 3);
    const int L = 1 + static_cast<int>(rng() % 3);
    const int H = 1 + static_cast<int>(rng() % 8);
    const auto agg = rng() % 2 ? Aggregation::Pna : Aggregation::Mean;
    const auto kind = rng() % 2 ? LossKind::Logistic : LossKind::Squared;
    const Graph g = testutil::random_graph(n, 0.3, rng);
    Eigen::MatrixXd X(n, in);
    for (Eigen::Index k = 0; k < X.size(); ++k) X.data()[k] = z(rng);
    auto p = GnnParams::glorot(in, L, H, agg, rng());
    // nonzero biases so that every parameter gets exercised
    Eigen::VectorXd theta = p.flatten();
    for (auto& v : theta) v += 0.1 * z(rng);
    p.assign(theta);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = kind == LossKind::Logistic ? static_cast<double>(rng() % 2) : z(rng);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (rng() % 4) keep.push_back(i);
    const NodeSet mask(keep);

    const auto an = gnn_backward(p, g, X, kind, y, mask);
    CHECK(an.loss == doctest::Approx(static_cast<double>(oracle_loss(p, g, X, theta, kind, y, mask))).epsilon(1e-10));
    Eigen::VectorXd fd(theta.size());
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      fd[k] = static_cast<double>((oracle_loss(p, g, X, tp, kind, y, mask) - oracle_loss(p, g, X, tm, kind, y, mask)) /
                                  (2 * h));
    }
    const double rel = (an.grad - fd).norm() / std::max(fd.norm(), 1e-8);
    worst = std::max(worst, rel);
    CHECK(rel <= 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
  MESSAGE("worst relative gradient error " << worst);
}

TEST_CASE("GNN forward is permutation equivariant") {
  std::mt19937_64 rng(5);
  const int n = 40;
  const Graph g = testutil::random_graph(n, 0.1, rng);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 2);
  const auto p = GnnParams::glorot(2, 2, 5, Aggregation::Pna, 9);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd Xp(n, 2);
  for (int i = 0; i < n; ++i) Xp.row(perm[i]) = X.row(i);
  const auto f = gnn_forward(p, g, X);
  const auto fp = gnn_forward(p, g.permuted(perm), Xp);
  for (int i = 0; i < n; ++i) CHECK(std::fabs(f[i] - fp[perm[i]]) < 1e-12);
}

TEST_CASE("isolated nodes aggregate to zero") {
  const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
  auto p = GnnParams::glorot(1, 1, 2, Aggregation::Pna, 4);
  Eigen::MatrixXd X(3, 1);
  X << 0.3, -0.2, 0.7;
  // node 2 has no neighbors: its output only sees its own features
  Eigen::MatrixXd X2 = X;
  X2(0, 0) = 5.0;
  X2(1, 0) = -5.0;
  CHECK(gnn_forward(p, g, X)[2] == gnn_forward(p, g, X2)[2]);
}

TEST_CASE("GNN training never increases the loss") {
  std::mt19937_64 rng(8);
  const int n = 120;
  const Graph g = testutil::random_graph(n, 0.04, rng);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = X(i, 0) > 0 ? 1 : 0;
  for (auto opt : {Optimizer::Adam, Optimizer::GradientDescent}) {
    GnnConfig cfg;
    cfg.epochs = 80;
    cfg.optimizer = opt;
    cfg.lr = opt == Optimizer::Adam ? 0.05 : 0.5;
    const auto m = gnn_train(g, X, y, NodeSet::range(n), LossKind::Logistic, cfg);
    REQUIRE(m.loss_trace.size() >= 2);
    for (std::size_t k = 1; k < m.loss_trace.size(); ++k) CHECK(m.loss_trace[k] <= m.loss_trace[k - 1]);
    CHECK(m.loss_trace.back() < m.loss_trace.front());
    const auto pr = m.predict(g, X);
    CHECK(pr.minCoeff() >= 0.0);
    CHECK(pr.maxCoeff() <= 1.0);
  }
  CHECK_THROWS_AS(gnn_train(g, X, y, NodeSet{}, LossKind::Squared, GnnConfig{}), EstimationError);
}

TEST_CASE("GNN training is deterministic") {
  std::mt19937_64 rng(1);
  const Graph g = testutil::random_graph(60, 0.08, rng);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(60, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Random(60);
  GnnConfig cfg;
  cfg.epochs = 30;
  const auto a = gnn_train(g, X, y, NodeSet::range(60), LossKind::Squared, cfg);
  const auto b = gnn_train(g, X, y, NodeSet::range(60), LossKind::Squared, cfg);
  CHECK(a.params.flatten() == b.params.flatten());
}

// ------------------------------------------------------------------ nuisance

namespace {

PanelDataset toy_panel(std::mt19937_64& rng, int n) {
  PanelDataset d;
  d.graph = testutil::random_graph(n, 4.0 / n, rng);
  d.X = Eigen::MatrixXd::Random(n, 1);
  d.D.resize(n);
  for (int i = 0; i < n; ++i) d.D[i] = (rng() % 100) < 45 ? 1 : 0;
  d.y_pre = Eigen::VectorXd::Random(n);
  d.y_post = Eigen::VectorXd::Random(n);
  d.validate();
  return d;
}

}  // namespace

TEST_CASE("nuisance fits are clipped and counted") {
  std::mt19937_64 rng(6);
  const auto d = toy_panel(rng, 300);
  const auto G = compute_exposure(d.graph, d.D, {ExposureKind::Any, 3});
  for (auto kind : {LearnerKind::Nglm, LearnerKind::Gnn}) {
    LearnerConfig cfg;
    cfg.learner = kind;
    cfg.epochs = 40;
    cfg.eps_clip = 0.2;
    const auto fit = fit_nuisances(d, G, 1, cfg, true);
    CHECK(fit.pi.minCoeff() >= 0.2);
    CHECK(fit.pi.maxCoeff() <= 0.8);
    int lo = 0, hi = 0;
    for (Eigen::Index i = 0; i < fit.pi_raw.size(); ++i) {
      lo += fit.pi_raw[i] < 0.2;
      hi += fit.pi_raw[i] > 0.8;
      CHECK(fit.pi_raw[i] == doctest::Approx(fit.p1[i] / (fit.p1[i] + fit.p0[i])));
    }
    CHECK(fit.clipped_low == lo);
    CHECK(fit.clipped_high == hi);
    CHECK(fit.mu1.has_value());
    CHECK(fit.p1.minCoeff() > 0);
    CHECK(fit.p1.maxCoeff() < 1);
  }
}

TEST_CASE("empty cells raise an overlap error naming the cell") {
  std::mt19937_64 rng(7);
  auto d = toy_panel(rng, 50);
  ExposureVector G;
  G.G.assign(50, 0);
  G.levels = {0, 1};
  for (int i = 0; i < 50; ++i)
    if (d.D[i] == 0) G.G[i] = 1;  // no treated unit at level 1
  try {
    fit_nuisances(d, G, 1, LearnerConfig{});
    FAIL("expected OverlapError");
  } catch (const OverlapError& e) {
    CHECK(std::string(e.what()).find("(d=1, g=1)") != std::string::npos);
  }
}

TEST_CASE("learner config validation") {
  LearnerConfig c;
  c.H = 9;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = LearnerConfig{};
  c.poly_degree = 4;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = LearnerConfig{};
  c.eps_clip = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_learner("gnn") == LearnerKind::Gnn);
  CHECK_THROWS(parse_learner("forest"));
}

TEST_CASE("intercept-only logistic fit on balanced labels predicts one half") {
  const Eigen::MatrixXd F = Eigen::MatrixXd::Ones(6, 1);
  const std::vector<int> y{1, 0, 1, 0, 1, 0};
  const auto fit = fit_logistic(F, y, NodeSet::range(6));
  CHECK(std::fabs(fit.weights[0]) < 1e-10);
  CHECK(fit.predict(F)[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("separable labels keep ridge logistic weights finite") {
  Eigen::MatrixXd F(8, 2);
  std::vector<int> y(8);
  for (int i = 0; i < 8; ++i) {
    F(i, 0) = 1.0;
    F(i, 1) = i - 3.5;
    y[i] = i >= 4;
  }
  GlmOptions opt;
  opt.ridge = 1e-2;
  const auto fit = fit_logistic(F, y, NodeSet::range(8), opt);
  CHECK(fit.converged);
  CHECK(fit.weights.allFinite());
  CHECK(fit.weights.cwiseAbs().maxCoeff() < 100.0);
}

TEST_CASE("least squares recovers an exactly linear target") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  const int n = 80;
  Eigen::MatrixXd F(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    F(i, 0) = 1.0;
    F(i, 1) = z(rng);
    F(i, 2) = z(rng);
    y[i] = 0.5 - 2.0 * F(i, 1) + 3.0 * F(i, 2);
  }
  GlmOptions opt;
  opt.ridge = 0.0;
  const auto fit = fit_least_squares(F, y, NodeSet::range(n), opt);
  CHECK((fit.predict(F) - y).cwiseAbs().maxCoeff() <= 1e-10);

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(n, 4.25);
  const auto fc = fit_least_squares(F, c, NodeSet::range(n), opt);
  CHECK(std::fabs(fc.weights[0] - 4.25) < 1e-10);
  CHECK(fc.weights.tail(2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("all-zero GNN parameters give zero output") {
  std::mt19937_64 rng(3);
  const Graph g = testutil::random_graph(30, 0.15, rng);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(30, 3);
  for (auto agg : {Aggregation::Mean, Aggregation::Pna}) {
    const auto p = GnnParams::zeros(3, 2, 4, agg);
    CHECK(gnn_forward(p, g, X).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("GNN output depends only on the L-hop neighborhood") {
  const int n = 10;
  const Graph g = testutil::path_graph(n);
  for (int L = 1; L <= 3; ++L) {
    const auto p = GnnParams::glorot(1, L, 4, Aggregation::Pna, 40 + L);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 1);
    const auto f = gnn_forward(p, g, X);
    // nodes farther than L hops from node 0 are changed
    for (int j = L + 1; j < n; ++j) X(j, 0) += 3.0 + j;
    const auto f2 = gnn_forward(p, g, X);
    CHECK(f2[0] == f[0]);
  }
}

TEST_CASE("GNN gradient vanishes when targets equal the outputs") {
  std::mt19937_64 rng(21);
  const Graph g = testutil::random_graph(25, 0.2, rng);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(25, 2);
  const auto p = GnnParams::glorot(2, 2, 3, Aggregation::Pna, 77);
  const Eigen::VectorXd y = gnn_forward(p, g, X);
  const auto gr = gnn_backward(p, g, X, LossKind::Squared, y, NodeSet::range(25));
  CHECK(gr.loss == 0.0);
  CHECK(gr.grad.cwiseAbs().maxCoeff() == 0.0);
}
