#include "cocofw/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cocofw/objectives.hpp"

namespace cocofw {
namespace {

constexpr double kExpCap = 700.0;
constexpr double kDriftTol = 1e-9;

}  // namespace

double CcvTracker::update(double g_value) {
  if (!std::isfinite(g_value)) throw std::invalid_argument("ccv_update: non-finite g value");
  q_ += g_plus(g_value);
  if (keep_history_) history_.push_back(q_);
  return q_;
}

LyapunovFn LyapunovFn::Exp(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("Exp Lyapunov function needs lambda > 0");
  }
  return {LyapunovKind::kExp, lambda};
}

const char* to_string(LyapunovKind kind) {
  switch (kind) {
    case LyapunovKind::kExp:
      return "exp";
    case LyapunovKind::kQuadLinear:
      return "quad-linear";
    case LyapunovKind::kQuad:
      return "quad";
  }
  return "unknown";
}

PhiValue phi_eval(const LyapunovFn& fn, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("phi_eval: argument must be >= 0");
  switch (fn.kind) {
    case LyapunovKind::kExp: {
      const double e = fn.lambda * x;
      const bool saturated = e > kExpCap;
      const double capped = std::exp(std::min(e, kExpCap));
      return {std::expm1(std::min(e, kExpCap)), fn.lambda * capped, saturated};
    }
    case LyapunovKind::kQuadLinear:
      return {x * x + x, 2.0 * x + 1.0, false};
    case LyapunovKind::kQuad:
      return {x * x, 2.0 * x, false};
  }
  return {};
}

void validate(const SurrogateParams& params) {
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw std::invalid_argument("beta must be positive and finite");
  }
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
}

double surrogate_value(const SurrogateParams& params, const LyapunovFn& fn, double q_t,
                       double f_value, double g_value) {
  const double penalty = g_plus(g_value);
  const double base = params.gamma * params.beta * f_value;
  if (penalty == 0.0) return base;
  return base + params.beta * phi_eval(fn, params.beta * q_t).phi_prime * penalty;
}

Vector surrogate_subgrad(const SurrogateParams& params, const LyapunovFn& fn, double q_t,
                         const Vector& f_grad, double g_value, const Vector& g_grad) {
  if (f_grad.size() != g_grad.size()) {
    throw std::invalid_argument("surrogate_subgrad: f and g gradients differ in dimension (" +
                                std::to_string(f_grad.size()) + " vs " +
                                std::to_string(g_grad.size()) + ")");
  }
  Vector out = params.gamma * params.beta * f_grad;
  if (g_value > 0.0) {
    out += params.beta * phi_eval(fn, params.beta * q_t).phi_prime * g_grad;
  }
  return out;
}

double surrogate_grad_bound(const SurrogateParams& params, const LyapunovFn& fn, double G,
                            double q) {
  return params.beta * G * (params.gamma + phi_eval(fn, params.beta * q).phi_prime);
}

bool drift_check(const LyapunovFn& fn, double beta, double q_prev, double q_curr,
                 double g_plus_val) {
  const PhiValue prev = phi_eval(fn, beta * q_prev);
  const PhiValue curr = phi_eval(fn, beta * q_curr);
  return curr.phi - prev.phi <= curr.phi_prime * beta * g_plus_val + kDriftTol;
}

}  // namespace cocofw
