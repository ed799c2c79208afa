#include "cocofw/ofw_tvc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cocofw {

OfwParams ofw_defaults(const ProblemMeta& meta) {
  const double D = meta.set.diameter();
  const double T = static_cast<double>(meta.horizon_T);
  return {{1.0 / (64.0 * meta.lipschitz_G * D), 1.0}, LyapunovFn::Exp(0.5 * std::pow(T, -0.75))};
}

double learning_rate(double D, double g_tilde, long T) {
  return D / (2.0 * g_tilde * std::pow(static_cast<double>(T), 0.75));
}

double step_size(long j) {
  if (j < 1) throw std::invalid_argument("step_size: j must be >= 1");
  return std::min(1.0, 2.0 / std::sqrt(static_cast<double>(j)));
}

Doubling double_until_covers(double g_tilde, double target) {
  if (!std::isfinite(target)) {
    throw std::runtime_error("doubling target is not finite; check beta and the Lyapunov scale");
  }
  Doubling out{g_tilde, 0};
  while (out.g_tilde < target) {
    out.g_tilde *= 2.0;
    ++out.doublings;
  }
  return out;
}

OfwTvc::OfwTvc(const ProblemMeta& meta, const OfwParams& params)
    : meta_(meta), params_(params), x_(Vector::Zero(meta.set.dimension())),
      eta_(learning_rate(meta.set.diameter(), 1.0, meta.horizon_T)),
      grad_sum_(Vector::Zero(meta.set.dimension())), anchor_(x_) {
  validate(meta_);
  validate(params_.surrogate);
}

RoundDiag OfwTvc::step(const RoundFunctions& round) {
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
  const Vector grad = surrogate_subgrad(sp, params_.phi, q, round.loss_subgrad(x_),
                                        diag.g_value, round.constraint_subgrad(x_));
  diag.phi_saturated = phi_eval(params_.phi, sp.beta * q).saturated;
  diag.drift_ok = drift_check(params_.phi, sp.beta, q_prev, q, g_plus(diag.g_value));

  diag.grad_bound = surrogate_grad_bound(sp, params_.phi, meta_.lipschitz_G, q);
  const Doubling dbl = double_until_covers(g_tilde_, diag.grad_bound);
  if (dbl.doublings > 0) {
    g_tilde_ = dbl.g_tilde;
    epoch_ += dbl.doublings;
    epoch_start_ = t_;
    eta_ = learning_rate(meta_.set.diameter(), g_tilde_, meta_.horizon_T);
    grad_sum_.setZero();
    anchor_ = x_;
  }
  diag.doubling_checked = true;

  grad_sum_ += grad;
  const Vector grad_f = eta_ * grad_sum_ + 2.0 * (x_ - anchor_);
  const Vector v = lmo(meta_.set, grad_f);
  const long j = t_ - epoch_start_ + 1;
  diag.sigma = step_size(j);
  diag.clamped = 2.0 / std::sqrt(static_cast<double>(j)) > 1.0;
  x_ += diag.sigma * (v - x_);

  diag.epoch = epoch_;
  diag.g_tilde = g_tilde_;
  return diag;
}

}  // namespace cocofw
