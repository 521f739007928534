#include "netdid/glm.hpp"

#include <cmath>
#include <string>

#include "netdid/errors.hpp"

namespace netdid {

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double log1pexp(double eta) {
  if (eta > 0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

Eigen::VectorXd GlmFit::predict(const Eigen::MatrixXd& F) const {
  Eigen::VectorXd eta = F * weights;
  if (link == Link::Logit)
    for (auto& v : eta) v = sigmoid(v);
  return eta;
}

namespace {

struct Masked {
  Eigen::MatrixXd G;      // masked rows, columns divided by scale
  Eigen::VectorXd scale;  // original weight = v / scale
};

Masked masked_scaled(const Eigen::MatrixXd& F, const NodeSet& mask) {
  Masked m;
  const auto rows = static_cast<Eigen::Index>(mask.size());
  m.G.resize(rows, F.cols());
  Eigen::Index r = 0;
  for (int i : mask) {
    if (i < 0 || i >= F.rows()) throw EstimationError("glm: mask index out of range");
    m.G.row(r++) = F.row(i);
  }
  m.scale.resize(F.cols());
  for (Eigen::Index k = 0; k < F.cols(); ++k) {
    const double s = rows > 0 ? m.G.col(k).cwiseAbs().maxCoeff() : 0.0;
    m.scale[k] = s > 0 ? s : 1.0;
    m.G.col(k) /= m.scale[k];
  }
  return m;
}

Eigen::VectorXd penalty_diag(const Eigen::VectorXd& scale, double ridge) {
  Eigen::VectorXd p = ridge * scale.cwiseInverse().cwiseAbs2();
  p[0] = 0.0;
  return p;
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& F, std::span<const int> labels, const NodeSet& mask,
                          const Eigen::VectorXd& w, double ridge) {
  double J = 0;
  for (int i : mask) {
    const double eta = F.row(i).dot(w);
    J += log1pexp(eta) - labels[i] * eta;
  }
  return J + 0.5 * ridge * w.tail(w.size() - 1).squaredNorm();
}

GlmFit fit_logistic(const Eigen::MatrixXd& F, std::span<const int> labels, const NodeSet& mask,
                    const GlmOptions& opt) {
  if (mask.empty()) throw EstimationError("fit_logistic: empty sample");
  int positives = 0;
  for (int i : mask) positives += labels[i] != 0;
  if (positives == 0 || positives == static_cast<int>(mask.size())) {
    throw EstimationError("fit_logistic: degenerate labels (all " + std::string(positives ? "1" : "0") + ")");
  }
  const auto m = masked_scaled(F, mask);
  Eigen::VectorXd y(m.G.rows());
  {
    Eigen::Index r = 0;
    for (int i : mask) y[r++] = labels[i] != 0 ? 1.0 : 0.0;
  }
  const Eigen::VectorXd pen = penalty_diag(m.scale, opt.ridge);
  auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd eta = m.G * v;
    double J = 0;
    for (Eigen::Index r = 0; r < eta.size(); ++r) J += log1pexp(eta[r]) - y[r] * eta[r];
    return J + 0.5 * v.dot(pen.cwiseProduct(v));
  };

  GlmFit fit;
  fit.link = Link::Logit;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(F.cols());
  double J = objective(v);
  for (fit.iterations = 0; fit.iterations < opt.max_iter; ++fit.iterations) {
    const Eigen::VectorXd eta = m.G * v;
    Eigen::VectorXd p(eta.size()), wts(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
      p[r] = sigmoid(eta[r]);
      wts[r] = p[r] * (1.0 - p[r]);
    }
    const Eigen::VectorXd grad = m.G.transpose() * (p - y) + pen.cwiseProduct(v);
    fit.grad_norm = grad.cwiseProduct(m.scale).cwiseAbs().maxCoeff();
    if (fit.grad_norm <= opt.tol) {
      fit.converged = true;
      break;
    }
    Eigen::MatrixXd H = m.G.transpose() * wts.asDiagonal() * m.G;
    H.diagonal() += pen;
    // Tiny Levenberg floor keeps the factorization defined on separable data
    // with ridge = 0.
    H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().maxCoeff());
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Eigen::VectorXd cand = v - t * step;
      const double Jc = objective(cand);
      if (std::isfinite(Jc) && Jc <= J + 1e-13 * (1.0 + std::abs(J))) {
        v = cand;
        J = Jc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  fit.weights = v.cwiseProduct(m.scale.cwiseInverse());
  fit.objective = logistic_objective(F, labels, mask, fit.weights, opt.ridge);
  if (!fit.converged) {
    // Recompute the final gradient for the diagnostic.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(F.cols());
    for (int i : mask) g += (sigmoid(F.row(i).dot(fit.weights)) - labels[i]) * F.row(i).transpose();
    g.tail(g.size() - 1) += opt.ridge * fit.weights.tail(g.size() - 1);
    fit.grad_norm = g.cwiseAbs().maxCoeff();
    fit.converged = fit.grad_norm <= opt.tol;
  }
  return fit;
}

GlmFit fit_least_squares(const Eigen::MatrixXd& F, const Eigen::VectorXd& y, const NodeSet& mask,
                         const GlmOptions& opt) {
  if (mask.empty()) throw EstimationError("fit_least_squares: empty sample");
  const auto m = masked_scaled(F, mask);
  Eigen::VectorXd t(m.G.rows());
  {
    Eigen::Index r = 0;
    for (int i : mask) t[r++] = y[i];
  }
  const Eigen::VectorXd pen = penalty_diag(m.scale, opt.ridge);
  Eigen::MatrixXd A = m.G.transpose() * m.G;
  A.diagonal() += pen;
  const Eigen::VectorXd b = m.G.transpose() * t;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const Eigen::VectorXd dd = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || dd.minCoeff() <= 1e-13 * std::max(1.0, dd.cwiseAbs().maxCoeff())) {
    throw EstimationError("fit_least_squares: rank-deficient design (" + std::to_string(mask.size()) + " rows, " +
                          std::to_string(F.cols()) + " columns, ridge " + std::to_string(opt.ridge) + ")");
  }
  Eigen::VectorXd v = ldlt.solve(b);
  v += ldlt.solve(b - A * v);  // one step of iterative refinement

  GlmFit fit;
  fit.link = Link::Identity;
  fit.iterations = 1;
  fit.weights = v.cwiseProduct(m.scale.cwiseInverse());
  const Eigen::VectorXd resid = m.G * v - t;
  fit.objective = 0.5 * resid.squaredNorm() + 0.5 * opt.ridge * fit.weights.tail(fit.weights.size() - 1).squaredNorm();
  fit.grad_norm = (m.G.transpose() * resid + pen.cwiseProduct(v)).cwiseProduct(m.scale).cwiseAbs().maxCoeff();
  fit.converged = true;
  return fit;
}

}  // namespace netdid
