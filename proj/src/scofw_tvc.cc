#include "cocofw/scofw_tvc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cocofw {

ScofwParams scofw_defaults(const ProblemMeta& meta, BetaVariant variant) {
  const double G = meta.lipschitz_G;
  const double D = meta.set.diameter();
  const double alpha = meta.strong_convexity_alpha;
  const double t23 = std::pow(static_cast<double>(meta.horizon_T), 2.0 / 3.0);
  ScofwParams p;
  p.surrogate.gamma = G / (G + alpha * D);
  p.surrogate.beta = variant == BetaVariant::kAppendix ? alpha / (500.0 * G * t23 * (G + alpha * D))
                                                       : 1.0 / (G * D * t23);
  return p;
}

Vector scofw_grad(const Vector& grad_sum, const Vector& point_sum, long t, double c1,
                  const Vector& at) {
  return grad_sum + 2.0 * c1 * (static_cast<double>(t) * at - point_sum);
}

LineSearch exact_line_search(const Vector& grad, const Vector& direction, double curvature,
                             long t) {
  const double dd = direction.squaredNorm();
  if (dd == 0.0) return {0.0, false};
  const double slope = grad.dot(direction);
  if (slope >= 0.0) return {0.0, false};
  if (curvature <= 0.0) {
    return {std::min(1.0, 2.0 / std::sqrt(static_cast<double>(std::max(t, 1L)))), true};
  }
  return {std::clamp(-slope / (2.0 * curvature * dd), 0.0, 1.0), false};
}

ScofwTvc::ScofwTvc(const ProblemMeta& meta, const ScofwParams& params)
    : meta_(meta), params_(params), x_(Vector::Zero(meta.set.dimension())),
      grad_sum_(Vector::Zero(meta.set.dimension())),
      point_sum_(Vector::Zero(meta.set.dimension())) {
  validate(meta_);
  validate(params_.surrogate);
  if (!(meta_.strong_convexity_alpha > 0.0)) {
    throw std::invalid_argument("scofw-tvc needs alpha_f > 0; use ofw-tvc for general convex losses");
  }
  c1_ = params_.surrogate.gamma * params_.surrogate.beta * meta_.strong_convexity_alpha / 2.0;
}

double ScofwTvc::objective(const Vector& y) const {
  const double t = static_cast<double>(t_);
  return grad_sum_.dot(y) + c1_ * (t * y.squaredNorm() - 2.0 * point_sum_.dot(y) + point_sq_sum_);
}

RoundDiag ScofwTvc::step(const RoundFunctions& round) {
  ++t_;
  RoundDiag diag;
  diag.x = x_;
  diag.f_value = round.loss_value(x_);
  diag.g_value = round.constraint_value(x_);
  const double q_prev = tracker_.q();
  const double q = tracker_.update(diag.g_value);
  diag.q = q;

  const SurrogateParams& sp = params_.surrogate;
  diag.surrogate_value = surrogate_value(sp, params_.phi, q, diag.f_value, diag.g_value);
  grad_sum_ += surrogate_subgrad(sp, params_.phi, q, round.loss_subgrad(x_), diag.g_value,
                                 round.constraint_subgrad(x_));
  point_sum_ += x_;
  point_sq_sum_ += x_.squaredNorm();
  diag.phi_saturated = phi_eval(params_.phi, sp.beta * q).saturated;
  diag.drift_ok = drift_check(params_.phi, sp.beta, q_prev, q, g_plus(diag.g_value));
  diag.grad_bound = surrogate_grad_bound(sp, params_.phi, meta_.lipschitz_G, q);

  const Vector grad = scofw_grad(grad_sum_, point_sum_, t_, c1_, x_);
  const Vector d = lmo(meta_.set, grad) - x_;
  const LineSearch ls = exact_line_search(grad, d, c1_ * static_cast<double>(t_), t_);
  diag.sigma = ls.sigma;
  diag.clamped = ls.fallback;
  x_ += ls.sigma * d;
  return diag;
}

}  // namespace cocofw
