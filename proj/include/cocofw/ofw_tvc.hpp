#pragma once

#include "cocofw/learner.hpp"

namespace cocofw {

struct OfwParams {
  SurrogateParams surrogate;
  LyapunovFn phi;
};

// beta = 1/(64 G D), gamma = 1, Phi = exp(x / (2 T^{3/4})) - 1.
OfwParams ofw_defaults(const ProblemMeta& meta);

double learning_rate(double D, double g_tilde, long T);

// min(1, 2/sqrt(j)) for j >= 1 rounds since the epoch start.
double step_size(long j);

struct Doubling {
  double g_tilde = 1.0;
  int doublings = 0;
};

// Doubles g_tilde while it is strictly below target.
Doubling double_until_covers(double g_tilde, double target);

// Online Frank-Wolfe on the surrogate losses with a doubling estimate of the
// surrogate gradient bound.
class OfwTvc final : public Learner {
 public:
  OfwTvc(const ProblemMeta& meta, const OfwParams& params);

  RoundDiag step(const RoundFunctions& round) override;

  const SurrogateParams& surrogate_params() const override { return params_.surrogate; }
  const LyapunovFn& lyapunov() const override { return params_.phi; }
  std::string name() const override { return "ofw-tvc"; }

  const Vector& x() const { return x_; }
  int epoch() const { return epoch_; }
  double g_tilde() const { return g_tilde_; }
  double eta() const { return eta_; }
  long epoch_start() const { return epoch_start_; }
  const Vector& grad_sum() const { return grad_sum_; }
  const Vector& anchor() const { return anchor_; }
  const CcvTracker& tracker() const { return tracker_; }

 private:
  ProblemMeta meta_;
  OfwParams params_;
  CcvTracker tracker_;
  Vector x_;
  int epoch_ = 1;
  double g_tilde_ = 1.0;
  long epoch_start_ = 1;
  double eta_;
  Vector grad_sum_;
  Vector anchor_;
  long t_ = 0;
};

}  // namespace cocofw
