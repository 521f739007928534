#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "netdid/graph.hpp"

namespace netdid {

enum class Aggregation { Pna, Mean };  // Pna concatenates mean, max and sum

Aggregation parse_aggregation(const std::string& s);
std::string to_string(Aggregation a);

// One message-passing layer:
//   m_j  = relu(W1 h_j + b1)
//   a_i  = aggregate_{j in N(i)} m_j          (neutral element 0 on empty N(i))
//   h_i' = relu(W0 [h_i; a_i] + b0)
struct GnnLayer {
  Eigen::MatrixXd W1;  // H x in
  Eigen::VectorXd b1;  // H
  Eigen::MatrixXd W0;  // H x (in + agg_width)
  Eigen::VectorXd b0;  // H
};

struct GnnParams {
  int in_dim = 0;
  int H = 0;
  Aggregation agg = Aggregation::Pna;
  std::vector<GnnLayer> layers;
  Eigen::VectorXd w_out;  // H
  double b_out = 0.0;

  [[nodiscard]] int L() const { return static_cast<int>(layers.size()); }
  [[nodiscard]] int agg_width() const { return agg == Aggregation::Pna ? 3 * H : H; }
  [[nodiscard]] Eigen::Index size() const;
  // Flat order: per layer W1, b1, W0, b0 (matrices column-major), then
  // w_out, b_out.
  [[nodiscard]] Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);

  static GnnParams zeros(int in_dim, int L, int H, Aggregation agg);
  // Glorot-uniform weights, zero biases.
  static GnnParams glorot(int in_dim, int L, int H, Aggregation agg, std::uint64_t seed);
};

// Pre-link output head value for every node. X is used as h^(0) as given.
Eigen::VectorXd gnn_forward(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X);

enum class LossKind { Logistic, Squared };

struct GnnGradient {
  double loss = 0.0;  // summed over the mask
  Eigen::VectorXd grad;  // flat, same order as GnnParams::flatten
};

// Exact gradient of sum_{i in mask} loss(targets_i, f_i). Logistic loss is
// -y f + log(1 + e^f); squared loss is 0.5 (y - f)^2. At ReLU kinks the
// derivative 0 is used; max aggregation routes the gradient to the smallest
// neighbor index attaining the maximum.
GnnGradient gnn_backward(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X, LossKind loss,
                         const Eigen::VectorXd& targets, const NodeSet& mask);

double gnn_loss(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X, LossKind loss,
                const Eigen::VectorXd& targets, const NodeSet& mask);

enum class Optimizer { Adam, GradientDescent };

Optimizer parse_optimizer(const std::string& s);
std::string to_string(Optimizer o);

struct GnnConfig {
  int L = 2;
  int H = 5;
  Aggregation agg = Aggregation::Pna;
  int epochs = 300;
  double lr = 0.02;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::Adam;
};

// Trained network together with the input and target standardization it
// was fit under.
struct GnnModel {
  GnnParams params;
  LossKind loss = LossKind::Squared;
  Eigen::RowVectorXd x_mean;
  Eigen::RowVectorXd x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<double> loss_trace;  // mean training loss after each accepted epoch
  int step_halvings = 0;

  // Probabilities for Logistic, outcome-scale predictions for Squared.
  [[nodiscard]] Eigen::VectorXd predict(const Graph& g, const Eigen::MatrixXd& X) const;
};

// Full-batch training on `mask`. A step that raises the training loss is
// undone and the step size halved, so the recorded loss never increases.
// Throws EstimationError on an empty mask or a non-finite loss.
GnnModel gnn_train(const Graph& g, const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const NodeSet& mask,
                   LossKind loss, const GnnConfig& cfg);

}  // namespace netdid
