#pragma once

#include <vector>

#include "cocofw/geometry.hpp"

namespace cocofw {

// Running CCV Q_t = sum_{tau <= t} g_tau^+.
class CcvTracker {
 public:
  explicit CcvTracker(bool keep_history = false) : keep_history_(keep_history) {}

  // Returns the new Q.
  double update(double g_value);
  double q() const { return q_; }
  const std::vector<double>& history() const { return history_; }

 private:
  double q_ = 0.0;
  bool keep_history_;
  std::vector<double> history_;
};

enum class LyapunovKind { kExp, kQuadLinear, kQuad };

struct LyapunovFn {
  LyapunovKind kind = LyapunovKind::kExp;
  double lambda = 1.0;  // Exp only

  static LyapunovFn Exp(double lambda);
  static LyapunovFn QuadLinear() { return {LyapunovKind::kQuadLinear, 0.0}; }
  static LyapunovFn Quad() { return {LyapunovKind::kQuad, 0.0}; }
};

const char* to_string(LyapunovKind kind);

struct PhiValue {
  double phi = 0.0;
  double phi_prime = 0.0;
  // Exp only: the exponent was capped at 700.
  bool saturated = false;
};

PhiValue phi_eval(const LyapunovFn& fn, double x);

struct SurrogateParams {
  double beta = 1.0;
  double gamma = 1.0;
};

void validate(const SurrogateParams& params);

// gamma*beta*f + beta*Phi'(beta*q_t)*g^+, with q_t already including round t.
double surrogate_value(const SurrogateParams& params, const LyapunovFn& fn, double q_t,
                       double f_value, double g_value);

Vector surrogate_subgrad(const SurrogateParams& params, const LyapunovFn& fn, double q_t,
                         const Vector& f_grad, double g_value, const Vector& g_grad);

// beta*G*(gamma + Phi'(beta*q)), the round's surrogate gradient bound.
double surrogate_grad_bound(const SurrogateParams& params, const LyapunovFn& fn, double G,
                            double q);

bool drift_check(const LyapunovFn& fn, double beta, double q_prev, double q_curr,
                 double g_plus_val);

}  // namespace cocofw
