#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netdid/dataset.hpp"
#include "netdid/exposure.hpp"

namespace netdid {

enum class DgpKind { MainS6, AppendixE };
enum class PeerOutcome { Simultaneous, Lagged };

DgpKind parse_dgp(const std::string& s);
std::string to_string(DgpKind k);
PeerOutcome parse_peer_outcome(const std::string& s);
std::string to_string(PeerOutcome p);

struct DgpConfig {
  DgpKind kind = DgpKind::MainS6;
  int n = 2000;
  std::uint64_t seed = 1;
  std::optional<double> radius;  // default sqrt(5 / (pi n))
  ExposureMap exposure{ExposureKind::Any, 3};

  // Network design. The treatment index is
  //   c0 + treat_peer * W D + W X - X + nu + W nu
  // and the post outcome
  //   c0 + outcome_peer * W Y + outcome_x_peer * W X + X + mu + W mu,
  // W the row-normalized adjacency.
  double treat_peer = 1.5;
  double outcome_peer = 0.8;
  double outcome_x_peer = 10.0;
  PeerOutcome peer_outcome = PeerOutcome::Simultaneous;
  int max_iter = 10000;
  double tol = 1e-10;

  // Treatment-spillover design: X = 1 + X2 / (1 + exp(X1)),
  // D ~ Bernoulli(logistic(theta_d[0] + theta_d[1] X + nu)), and
  // Y = theta[0] + theta[1] D + theta[2] D G + theta[3] X + error.
  std::array<double, 2> theta_d{0.4, 1.5};
  std::array<double, 4> theta_pre{1.0, 0.0, 0.0, 0.6};
  std::array<double, 4> theta_post{0.5, 0.2, 0.2, 0.8};

  void validate() const;
};

struct SimulatedPanel {
  PanelDataset data;
  ExposureVector G;
  // Potential outcomes Y_t(d, g): column d * levels + k for level G.levels[k].
  Eigen::MatrixXd y_pre_cf;
  Eigen::MatrixXd y_post_cf;
  int treatment_iterations = 0;
  bool treatment_converged = true;
  int outcome_iterations = 0;
  double outcome_residual = 0.0;

  [[nodiscard]] double y_post(int i, int d, int g) const;
  [[nodiscard]] double y_pre(int i, int d, int g) const;
};

SimulatedPanel simulate(const DgpConfig& cfg);
SimulatedPanel simulate_main_s6(const DgpConfig& cfg);
SimulatedPanel simulate_appendix_e(const DgpConfig& cfg);

struct FixedPointResult {
  std::vector<int> D;
  int iterations = 0;
  bool converged = false;
  int residual_flips = 0;  // best-response changes left in the returned profile
};

// D_i = 1{index_i + peer * (W D)_i > 0} by simultaneous best responses from
// D = 0. Without convergence the visited profile with the fewest pending
// flips is returned, flagged.
FixedPointResult solve_treatment_fixed_point(const Graph& g, const Eigen::VectorXd& index, double peer, int max_iter);

struct LinearSolveResult {
  Eigen::VectorXd y;
  int iterations = 0;
  double residual = 0.0;  // infinity norm of (I - beta W) y - rhs
};

// Solves (I - beta W) y = rhs by fixed-point iteration; |beta| < 1. Throws
// EstimationError when the residual does not reach tol.
LinearSolveResult solve_linear_in_means(const Graph& g, const Eigen::VectorXd& rhs, double beta, double tol = 1e-10,
                                        int max_iter = 10000);

// (W v)_i: neighbor mean of v, zero for isolated nodes.
Eigen::VectorXd neighbor_mean(const Graph& g, const Eigen::VectorXd& v);

// Effects computed from the stored potential outcomes of one panel.
struct PotentialOutcomeTruth {
  std::map<int, double> datt;       // mean of Y(1,g) - Y(0,g) over D=1, G=g
  double datt_overall = 0.0;        // same over all treated at their own level
  double satt0 = 0.0;               // mean of Y(0,G) - Y(0,0) over the treated
  double att = 0.0;                 // mean of Y(1,G) - Y(0,0) over the treated
  std::map<int, double> satt1;      // mean of Y(1,g) - Y(1,0) over D=1, G=g
  int treated = 0;
};

PotentialOutcomeTruth potential_outcome_effects(const SimulatedPanel& sp);

// Average of the per-panel total ATT over reps panels with seeds seed + r.
double potential_outcome_att(const DgpConfig& cfg, int reps);

// E[logistic(a + nu)], nu ~ N(0, 1).
double logistic_normal_mean(double a);

// True nuisances of the treatment-spillover design with the default ANY
// exposure: joint propensities, cell propensity and outcome-change means.
struct AppendixETruth {
  Eigen::VectorXd p1;  // P(D=1, G=g | X, A)
  Eigen::VectorXd p0;  // P(D=0, G=g | X, A)
  Eigen::VectorXd mu0; // E[dY | D=0, G=g, X, A]
  Eigen::VectorXd mu1; // E[dY | D=1, G=g, X, A]
};

AppendixETruth appendix_e_truth(const SimulatedPanel& sp, const DgpConfig& cfg, int g);

}  // namespace netdid
