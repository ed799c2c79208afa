#include "cocofw/bandit_algorithms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cocofw/ofw_tvc.hpp"

namespace cocofw {
namespace {

// Keeps the exploration stream independent of the problem generator, which
// is seeded with the same run seed.
std::uint64_t sampler_seed(std::uint64_t seed) {
  std::uint64_t z = seed ^ 0xB5AD4ECEDA1CE2A9ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_common(double c, double delta, long block_k, const ProblemMeta& meta) {
  validate(meta);
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (!(delta > 0.0) || !(delta < meta.set.inner_radius())) {
    throw std::invalid_argument("delta must satisfy 0 < delta < r (delta = " +
                                std::to_string(delta) +
                                ", r = " + std::to_string(meta.set.inner_radius()) + ")");
  }
  if (block_k < 1 || block_k > meta.horizon_T) {
    throw std::invalid_argument("block size K must be in [1, T]");
  }
}

}  // namespace

double fw_gap(const Vector& grad, const Vector& y, const Vector& v) { return grad.dot(y - v); }

BfwParams bfw_defaults(const ProblemMeta& meta, std::optional<double> c_opt) {
  const double T = static_cast<double>(meta.horizon_T);
  const double G = meta.lipschitz_G;
  const double D = meta.set.diameter();
  const double r = meta.set.inner_radius();
  const double d = meta.set.dimension();
  const double M = meta.value_bound_M;
  const double c = c_opt.value_or(0.5 * r);
  const double c2 = 16.0 * G * (c * D / r + 3.0 * c + 1.0 + 2.0 * c * D / (d * M) + d * M * D / c);
  BfwParams p;
  p.surrogate = {1.0 / c2, 1.0};
  p.phi = LyapunovFn::Exp(0.5 * std::pow(T, -0.75));
  p.c = c;
  p.delta = c * std::pow(T, -0.25);
  p.block_k = static_cast<long>(std::ceil(std::sqrt(T)));
  p.epsilon = 4.0 * D * D / std::sqrt(T);
  return p;
}

void validate(const BfwParams& p, const ProblemMeta& meta) {
  validate(p.surrogate);
  validate_common(p.c, p.delta, p.block_k, meta);
  if (!(p.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

BfwTvc::BfwTvc(const ProblemMeta& meta, const BfwParams& params, std::uint64_t seed)
    : meta_(meta), params_(params), shrunk_(meta.set, params.delta),
      sampler_(meta.set.dimension(), sampler_seed(seed)),
      y_hat_(Vector::Zero(meta.set.dimension())), buffer_(Vector::Zero(meta.set.dimension())),
      grad_sum_(Vector::Zero(meta.set.dimension())), anchor_(y_hat_) {
  validate(params_, meta_);
}

RoundDiag BfwTvc::step(const RoundFunctions& round) {
  ++t_;
  ++in_block_;
  const Vector u = sampler_.sample();
  RoundDiag diag;
  diag.x = play_point(y_hat_, params_.delta, u);
  diag.f_value = round.loss_value(diag.x);
  diag.g_value = round.constraint_value(diag.x);
  const double q_prev = tracker_.q();
  const double q = tracker_.update(diag.g_value);
  diag.q = q;

  const SurrogateParams& sp = params_.surrogate;
  diag.surrogate_value = surrogate_value(sp, params_.phi, q, diag.f_value, diag.g_value);
  buffer_ += one_point_grad(diag.surrogate_value, u, meta_.set.dimension(), params_.delta);
  diag.phi_saturated = phi_eval(params_.phi, sp.beta * q).saturated;
  diag.drift_ok = drift_check(params_.phi, sp.beta, q_prev, q, g_plus(diag.g_value));
  const double bound = surrogate_grad_bound(sp, params_.phi, meta_.lipschitz_G, q);
  block_bound_ = std::max(block_bound_, bound);
  diag.block = block_m_;
  diag.grad_bound = bound;

  if (in_block_ == params_.block_k || t_ == meta_.horizon_T) {
    diag.grad_bound = block_bound_;
    diag.doubling_checked = true;
    last_block_terms_ = in_block_;
    block_end(buffer_, block_bound_);
    buffer_.setZero();
    block_bound_ = 0.0;
    in_block_ = 0;
    diag.sigma = last_sigma_;
  }
  diag.epoch = epoch_;
  diag.g_tilde = g_tilde_;
  return diag;
}

void BfwTvc::block_end(const Vector& block_grad, double block_bound) {
  const Doubling dbl = double_until_covers(g_tilde_, block_bound);
  if (dbl.doublings > 0) {
    g_tilde_ = dbl.g_tilde;
    epoch_ += dbl.doublings;
    epoch_start_block_ = block_m_;
    grad_sum_.setZero();
    anchor_ = y_hat_;
  }
  const double D = meta_.set.diameter();
  const double d = meta_.set.dimension();
  eta_ = params_.c * D /
         (d * meta_.value_bound_M * g_tilde_ * std::pow(static_cast<double>(meta_.horizon_T), 0.75));
  grad_sum_ += block_grad;

  Vector y = y_hat_;
  long iters = 0;
  last_sigma_ = 0.0;
  for (;;) {
    const Vector grad = eta_ * grad_sum_ + 2.0 * (y - anchor_);
    const Vector v = lmo_shrunk(shrunk_, grad);
    last_gap_ = fw_gap(grad, y, v);
    if (last_gap_ <= params_.epsilon) break;
    if (iters >= kMaxInnerIters) {
      throw std::runtime_error("bfw-tvc: inner loop hit " + std::to_string(kMaxInnerIters) +
                               " iterations at block " + std::to_string(block_m_) +
                               " with FW gap " + std::to_string(last_gap_) + " > epsilon " +
                               std::to_string(params_.epsilon));
    }
    const Vector dir = v - y;
    last_sigma_ = exact_line_search(grad, dir, 1.0, 1).sigma;
    y += last_sigma_ * dir;
    ++iters;
  }
  last_inner_iters_ = iters;
  y_hat_ = std::move(y);
  ++block_m_;
}

ScbfwParams scbfw_defaults(const ProblemMeta& meta, std::optional<double> c_opt,
                           BetaVariant variant) {
  const double T = static_cast<double>(meta.horizon_T);
  const double G = meta.lipschitz_G;
  const double D = meta.set.diameter();
  const double r = meta.set.inner_radius();
  const double alpha = meta.strong_convexity_alpha;
  const double c = c_opt.value_or(0.5 * r);
  const double t23 = std::pow(T, 2.0 / 3.0);
  ScbfwParams p;
  if (variant == BetaVariant::kAppendix) {
    const double big_c = 8.0 + 3.0 * c + c * D / r + 12.0 * D;
    p.surrogate.beta = 1.0;
    p.surrogate.gamma =
        alpha > 0.0 ? 16.0 / alpha * (8.0 * std::log(std::cbrt(T)) + big_c) * G * G * t23 : 0.0;
  } else {
    p.surrogate.beta = 1.0 / (G * D * t23);
    p.surrogate.gamma = G / (G + alpha * D);
  }
  p.c = c;
  p.delta = c / std::cbrt(T);
  p.block_k = static_cast<long>(std::ceil(t23 - 1e-9));
  p.inner_l = p.block_k;
  return p;
}

void validate(const ScbfwParams& p, const ProblemMeta& meta) {
  if (!(meta.strong_convexity_alpha > 0.0)) {
    throw std::invalid_argument("scbfw-tvc needs alpha_f > 0; use bfw-tvc for general convex losses");
  }
  validate(p.surrogate);
  validate_common(p.c, p.delta, p.block_k, meta);
  if (p.inner_l < 0) throw std::invalid_argument("inner iteration count L must be >= 0");
}

ScbfwTvc::ScbfwTvc(const ProblemMeta& meta, const ScbfwParams& params, std::uint64_t seed)
    : meta_(meta), params_(params), shrunk_(meta.set, params.delta),
      sampler_(meta.set.dimension(), sampler_seed(seed)),
      y_hat_(Vector::Zero(meta.set.dimension())), buffer_(Vector::Zero(meta.set.dimension())),
      grad_sum_(Vector::Zero(meta.set.dimension())) {
  validate(params_, meta_);
}

RoundDiag ScbfwTvc::step(const RoundFunctions& round) {
  ++t_;
  ++in_block_;
  const Vector u = sampler_.sample();
  RoundDiag diag;
  diag.x = play_point(y_hat_, params_.delta, u);
  diag.f_value = round.loss_value(diag.x);
  diag.g_value = round.constraint_value(diag.x);
  const double q_prev = tracker_.q();
  const double q = tracker_.update(diag.g_value);
  diag.q = q;

  const SurrogateParams& sp = params_.surrogate;
  diag.surrogate_value = surrogate_value(sp, params_.phi, q, diag.f_value, diag.g_value);
  buffer_ += one_point_grad(diag.surrogate_value, u, meta_.set.dimension(), params_.delta);
  diag.phi_saturated = phi_eval(params_.phi, sp.beta * q).saturated;
  diag.drift_ok = drift_check(params_.phi, sp.beta, q_prev, q, g_plus(diag.g_value));
  diag.grad_bound = surrogate_grad_bound(sp, params_.phi, meta_.lipschitz_G, q);
  diag.block = block_m_;

  if (in_block_ == params_.block_k || t_ == meta_.horizon_T) {
    last_block_terms_ = in_block_;
    block_end(buffer_, t_);
    buffer_.setZero();
    in_block_ = 0;
    diag.sigma = last_sigma_;
  }
  return diag;
}

void ScbfwTvc::block_end(const Vector& block_grad, long t) {
  grad_sum_ += block_grad;
  last_sigma_ = 0.0;
  c3_ = params_.surrogate.gamma * params_.surrogate.beta * meta_.strong_convexity_alpha *
        static_cast<double>(t) / 2.0;
  Vector y = y_hat_;
  for (long tau = 0; tau < params_.inner_l; ++tau) {
    const Vector grad = grad_sum_ + 2.0 * c3_ * y;
    const Vector dir = lmo_shrunk(shrunk_, grad) - y;
    last_sigma_ = exact_line_search(grad, dir, c3_, t).sigma;
    y += last_sigma_ * dir;
  }
  y_hat_ = std::move(y);
  ++block_m_;
}

}  // namespace cocofw
