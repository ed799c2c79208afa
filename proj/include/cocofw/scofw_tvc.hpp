#pragma once

#include "cocofw/learner.hpp"

namespace cocofw {

enum class BetaVariant { kAppendix, kTheorem };

struct ScofwParams {
  SurrogateParams surrogate;
  LyapunovFn phi = LyapunovFn::QuadLinear();
};

// gamma = G/(G + alpha D), Phi = x^2 + x. Appendix beta is
// alpha / (500 G T^{2/3} (G + alpha D)); theorem beta is 1/(G D T^{2/3}).
ScofwParams scofw_defaults(const ProblemMeta& meta, BetaVariant variant = BetaVariant::kAppendix);

// grad_sum + 2 c1 (t * at - point_sum)
Vector scofw_grad(const Vector& grad_sum, const Vector& point_sum, long t, double c1,
                  const Vector& at);

struct LineSearch {
  double sigma = 0.0;
  bool fallback = false;
};

// Minimiser over [0, 1] of s -> F(x + s d) for F with Hessian 2*curvature*I,
// given grad = grad F(x). With zero curvature and a descent direction it
// falls back to min(1, 2/sqrt(t)).
LineSearch exact_line_search(const Vector& grad, const Vector& direction, double curvature,
                             long t);

class ScofwTvc final : public Learner {
 public:
  ScofwTvc(const ProblemMeta& meta, const ScofwParams& params);

  RoundDiag step(const RoundFunctions& round) override;

  const SurrogateParams& surrogate_params() const override { return params_.surrogate; }
  const LyapunovFn& lyapunov() const override { return params_.phi; }
  std::string name() const override { return "scofw-tvc"; }

  const Vector& x() const { return x_; }
  double c1() const { return c1_; }
  long round() const { return t_; }
  const Vector& grad_sum() const { return grad_sum_; }
  const Vector& point_sum() const { return point_sum_; }
  // F_t^sc(y) up to a constant, for the accumulated rounds.
  double objective(const Vector& y) const;

 private:
  ProblemMeta meta_;
  ScofwParams params_;
  CcvTracker tracker_;
  double c1_;
  Vector x_;
  Vector grad_sum_;
  Vector point_sum_;
  double point_sq_sum_ = 0.0;
  long t_ = 0;
};

}  // namespace cocofw
