#include "netdid/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "netdid/errors.hpp"
#include "netdid/glm.hpp"

namespace netdid {

Aggregation parse_aggregation(const std::string& s) {
  if (s == "pna") return Aggregation::Pna;
  if (s == "mean") return Aggregation::Mean;
  throw std::invalid_argument("unknown aggregation '" + s + "' (expected pna|mean)");
}

std::string to_string(Aggregation a) { return a == Aggregation::Pna ? "pna" : "mean"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "gd") return Optimizer::GradientDescent;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected adam|gd)");
}

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "gd"; }

Eigen::Index GnnParams::size() const {
  Eigen::Index s = 0;
  for (const auto& l : layers) s += l.W1.size() + l.b1.size() + l.W0.size() + l.b0.size();
  return s + w_out.size() + 1;
}

Eigen::VectorXd GnnParams::flatten() const {
  Eigen::VectorXd out(size());
  Eigen::Index k = 0;
  auto put = [&](const auto& m) {
    out.segment(k, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    k += m.size();
  };
  for (const auto& l : layers) {
    put(l.W1);
    put(l.b1);
    put(l.W0);
    put(l.b0);
  }
  put(w_out);
  out[k] = b_out;
  return out;
}

void GnnParams::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != size()) throw std::invalid_argument("GnnParams::assign: size mismatch");
  Eigen::Index k = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(k, m.size());
    k += m.size();
  };
  for (auto& l : layers) {
    take(l.W1);
    take(l.b1);
    take(l.W0);
    take(l.b0);
  }
  take(w_out);
  b_out = flat[k];
}

GnnParams GnnParams::zeros(int in_dim, int L, int H, Aggregation agg) {
  if (in_dim < 1 || L < 1 || H < 1) throw std::invalid_argument("GnnParams: in_dim, L and H must be positive");
  GnnParams p;
  p.in_dim = in_dim;
  p.H = H;
  p.agg = agg;
  for (int l = 0; l < L; ++l) {
    const int in = l == 0 ? in_dim : H;
    GnnLayer layer;
    layer.W1 = Eigen::MatrixXd::Zero(H, in);
    layer.b1 = Eigen::VectorXd::Zero(H);
    layer.W0 = Eigen::MatrixXd::Zero(H, in + p.agg_width());
    layer.b0 = Eigen::VectorXd::Zero(H);
    p.layers.push_back(std::move(layer));
  }
  p.w_out = Eigen::VectorXd::Zero(H);
  return p;
}

GnnParams GnnParams::glorot(int in_dim, int L, int H, Aggregation agg, std::uint64_t seed) {
  GnnParams p = zeros(in_dim, L, H, agg);
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::MatrixXd& m) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
  };
  for (auto& l : p.layers) {
    fill(l.W1);
    fill(l.W0);
  }
  Eigen::MatrixXd head(1, H);
  fill(head);
  p.w_out = head.row(0).transpose();
  return p;
}

namespace {

struct LayerCache {
  Eigen::MatrixXd h_in;  // n x in
  Eigen::MatrixXd a;     // n x H, message pre-activation
  Eigen::MatrixXd agg;   // n x agg_width
  Eigen::MatrixXi argmax;  // n x H, -1 when no neighbor
  Eigen::MatrixXd z;     // n x H, combine pre-activation
};

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

// Order-independent sum: neighbor values are added in ascending order so the
// result does not depend on node labels. Neighborhoods are small, so an
// insertion sort is used.
double sorted_sum(double* vals, std::size_t len) {
  for (std::size_t a = 1; a < len; ++a) {
    const double v = vals[a];
    std::size_t b = a;
    for (; b > 0 && vals[b - 1] > v; --b) vals[b] = vals[b - 1];
    vals[b] = v;
  }
  double s = 0;
  for (std::size_t a = 0; a < len; ++a) s += vals[a];
  return s;
}

Eigen::VectorXd forward_cached(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X,
                               std::vector<LayerCache>* caches, Eigen::MatrixXd* h_last) {
  const int n = g.num_nodes();
  if (X.rows() != n || X.cols() != p.in_dim) {
    throw std::invalid_argument("gnn_forward: X is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                                ", expected " + std::to_string(n) + "x" + std::to_string(p.in_dim));
  }
  const int H = p.H;
  Eigen::MatrixXd h = X;
  std::vector<double> vals;
  for (const auto& layer : p.layers) {
    LayerCache c;
    c.a = (h * layer.W1.transpose()).rowwise() + layer.b1.transpose();
    const Eigen::MatrixXd m = relu(c.a);
    const Eigen::MatrixXd mT = m.transpose();  // H x n, one column per node
    const double* mt = mT.data();
    c.agg = Eigen::MatrixXd::Zero(n, p.agg_width());
    c.argmax = Eigen::MatrixXi::Constant(n, H, -1);
    for (int i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      if (nb.empty()) continue;
      vals.resize(nb.size());
      for (int k = 0; k < H; ++k) {
        int best = -1;
        double best_v = 0;
        for (std::size_t q = 0; q < nb.size(); ++q) {
          const double v = mt[static_cast<std::size_t>(nb[q]) * H + k];
          vals[q] = v;
          if (best < 0 || v > best_v) {
            best = nb[q];
            best_v = v;
          }
        }
        const double s = sorted_sum(vals.data(), vals.size());
        c.agg(i, k) = s / static_cast<double>(nb.size());
        if (p.agg == Aggregation::Pna) {
          c.agg(i, H + k) = best_v;
          c.agg(i, 2 * H + k) = s;
        }
        c.argmax(i, k) = best;
      }
    }
    Eigen::MatrixXd cat(n, h.cols() + c.agg.cols());
    cat << h, c.agg;
    c.z = (cat * layer.W0.transpose()).rowwise() + layer.b0.transpose();
    c.h_in = std::move(h);
    h = relu(c.z);
    if (caches) caches->push_back(std::move(c));
  }
  Eigen::VectorXd out = (h * p.w_out).array() + p.b_out;
  if (h_last) *h_last = std::move(h);
  return out;
}

double pointwise_loss(LossKind kind, double y, double f, double* dloss) {
  if (kind == LossKind::Logistic) {
    if (dloss) *dloss = sigmoid(f) - y;
    return log1pexp(f) - y * f;
  }
  if (dloss) *dloss = f - y;
  return 0.5 * (y - f) * (y - f);
}

}  // namespace

Eigen::VectorXd gnn_forward(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X) {
  return forward_cached(p, g, X, nullptr, nullptr);
}

double gnn_loss(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X, LossKind loss,
                const Eigen::VectorXd& targets, const NodeSet& mask) {
  const Eigen::VectorXd f = gnn_forward(p, g, X);
  double total = 0;
  for (int i : mask) total += pointwise_loss(loss, targets[i], f[i], nullptr);
  return total;
}

GnnGradient gnn_backward(const GnnParams& p, const Graph& g, const Eigen::MatrixXd& X, LossKind loss,
                         const Eigen::VectorXd& targets, const NodeSet& mask) {
  const int n = g.num_nodes();
  const int H = p.H;
  std::vector<LayerCache> caches;
  Eigen::MatrixXd h_last;
  const Eigen::VectorXd f = forward_cached(p, g, X, &caches, &h_last);

  GnnGradient out;
  Eigen::VectorXd df = Eigen::VectorXd::Zero(n);
  for (int i : mask) {
    double d = 0;
    out.loss += pointwise_loss(loss, targets[i], f[i], &d);
    df[i] = d;
  }
  GnnParams grad = GnnParams::zeros(p.in_dim, p.L(), H, p.agg);
  grad.w_out = h_last.transpose() * df;
  grad.b_out = df.sum();
  Eigen::MatrixXd dh = df * p.w_out.transpose();  // n x H

  for (int l = p.L() - 1; l >= 0; --l) {
    const auto& layer = p.layers[l];
    const auto& c = caches[l];
    auto& gl = grad.layers[l];
    const Eigen::MatrixXd dz = dh.cwiseProduct((c.z.array() > 0.0).cast<double>().matrix());
    const auto in = c.h_in.cols();
    Eigen::MatrixXd cat(n, in + c.agg.cols());
    cat << c.h_in, c.agg;
    gl.W0 = dz.transpose() * cat;
    gl.b0 = dz.colwise().sum().transpose();
    const Eigen::MatrixXd dcat = dz * layer.W0;  // n x (in + agg)
    Eigen::MatrixXd dh_in = dcat.leftCols(in);
    const Eigen::MatrixXd dagg = dcat.rightCols(c.agg.cols());

    Eigen::MatrixXd dmT = Eigen::MatrixXd::Zero(H, n);
    double* dmt = dmT.data();
    for (int i = 0; i < n; ++i) {
      const auto nb = g.neighbors(i);
      if (nb.empty()) continue;
      const double inv = 1.0 / static_cast<double>(nb.size());
      for (int k = 0; k < H; ++k) {
        double spread = dagg(i, k) * inv;
        if (p.agg == Aggregation::Pna) {
          spread += dagg(i, 2 * H + k);
          dmt[static_cast<std::size_t>(c.argmax(i, k)) * H + k] += dagg(i, H + k);
        }
        for (int j : nb) dmt[static_cast<std::size_t>(j) * H + k] += spread;
      }
    }
    const Eigen::MatrixXd dm = dmT.transpose();
    const Eigen::MatrixXd da = dm.cwiseProduct((c.a.array() > 0.0).cast<double>().matrix());
    gl.W1 = da.transpose() * c.h_in;
    gl.b1 = da.colwise().sum().transpose();
    dh_in += da * layer.W1;
    dh = std::move(dh_in);
  }
  out.grad = grad.flatten();
  return out;
}

Eigen::VectorXd GnnModel::predict(const Graph& g, const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd Z = (X.rowwise() - x_mean).array().rowwise() / x_scale.array();
  Eigen::VectorXd f = gnn_forward(params, g, Z);
  if (loss == LossKind::Logistic) {
    for (auto& v : f) v = sigmoid(v);
    return f;
  }
  return (f.array() * y_scale + y_mean).matrix();
}

GnnModel gnn_train(const Graph& g, const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const NodeSet& mask,
                   LossKind loss, const GnnConfig& cfg) {
  if (mask.empty()) throw EstimationError("gnn_train: empty training mask");
  if (cfg.epochs < 0 || !(cfg.lr > 0)) throw std::invalid_argument("gnn_train: epochs >= 0 and lr > 0 required");
  const auto n = X.rows();
  GnnModel model;
  model.loss = loss;
  model.x_mean = X.colwise().mean();
  model.x_scale.resize(X.cols());
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    const double sd = std::sqrt((X.col(k).array() - model.x_mean[k]).square().sum() / static_cast<double>(n));
    model.x_scale[k] = sd > 0 ? sd : 1.0;
  }
  const Eigen::MatrixXd Z = (X.rowwise() - model.x_mean).array().rowwise() / model.x_scale.array();

  Eigen::VectorXd y = targets;
  double base = 0;
  for (int i : mask) base += targets[i];
  base /= static_cast<double>(mask.size());
  if (loss == LossKind::Squared) {
    double ss = 0;
    for (int i : mask) ss += (targets[i] - base) * (targets[i] - base);
    const double sd = std::sqrt(ss / static_cast<double>(mask.size()));
    model.y_mean = base;
    model.y_scale = sd > 0 ? sd : 1.0;
    y = (targets.array() - model.y_mean) / model.y_scale;
  }

  GnnParams params = GnnParams::glorot(static_cast<int>(X.cols()), cfg.L, cfg.H, cfg.agg, cfg.seed);
  if (loss == LossKind::Logistic) {
    const double q = std::clamp(base, 1e-6, 1.0 - 1e-6);
    params.b_out = std::log(q / (1.0 - q));
  }
  const double scale = 1.0 / static_cast<double>(mask.size());
  Eigen::VectorXd theta = params.flatten();
  auto evaluate = [&](const Eigen::VectorXd& t) {
    params.assign(t);
    auto gr = gnn_backward(params, g, Z, loss, y, mask);
    gr.loss *= scale;
    gr.grad *= scale;
    if (!std::isfinite(gr.loss)) throw EstimationError("gnn_train: non-finite training loss");
    return gr;
  };
  auto current = evaluate(theta);
  model.loss_trace.push_back(current.loss);

  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  double lr = cfg.lr;
  int t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Eigen::VectorXd step;
    Eigen::VectorXd m1_next = m1, m2_next = m2;
    if (cfg.optimizer == Optimizer::Adam) {
      m1_next = beta1 * m1 + (1 - beta1) * current.grad;
      m2_next = beta2 * m2 + (1 - beta2) * current.grad.cwiseAbs2();
      const double c1 = 1 - std::pow(beta1, t + 1);
      const double c2 = 1 - std::pow(beta2, t + 1);
      step = lr * (m1_next / c1).cwiseQuotient(((m2_next / c2).cwiseSqrt().array() + adam_eps).matrix());
    } else {
      step = lr * current.grad;
    }
    const Eigen::VectorXd cand = theta - step;
    auto next = evaluate(cand);
    if (next.loss <= current.loss) {
      theta = cand;
      current = std::move(next);
      m1 = std::move(m1_next);
      m2 = std::move(m2_next);
      ++t;
      model.loss_trace.push_back(current.loss);
    } else {
      lr *= 0.5;
      ++model.step_halvings;
      if (lr < cfg.lr * 1e-6) break;
    }
  }
  params.assign(theta);
  model.params = std::move(params);
  return model;
}

}  // namespace netdid
