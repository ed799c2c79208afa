#pragma once

#include <cstdint>

#include "cocofw/bandit_core.hpp"
#include "cocofw/learner.hpp"
#include "cocofw/scofw_tvc.hpp"

namespace cocofw {

// <grad, y - v>
double fw_gap(const Vector& grad, const Vector& y, const Vector& v);

struct BfwParams {
  SurrogateParams surrogate;
  LyapunovFn phi;
  double c = 1.0;
  double delta = 0.5;
  long block_k = 1;
  double epsilon = 1.0;
};

// gamma = 1, K = ceil(T^{1/2}), epsilon = 4 D^2 T^{-1/2}, delta = c T^{-1/4},
// beta = 1/C2 with C2 = 16 G (cD/r + 3c + 1 + 2cD/(dM) + dMD/c),
// Phi = exp(x / (2 T^{3/4})) - 1. c defaults to r/2.
BfwParams bfw_defaults(const ProblemMeta& meta, std::optional<double> c = {});

void validate(const BfwParams& params, const ProblemMeta& meta);

// Blocked bandit Frank-Wolfe on one-point estimates of the surrogate
// gradients, with a block-end doubling estimate and an FW-gap stopped inner
// loop.
class BfwTvc final : public Learner {
 public:
  static constexpr long kMaxInnerIters = 1'000'000;

  BfwTvc(const ProblemMeta& meta, const BfwParams& params, std::uint64_t seed);

  RoundDiag step(const RoundFunctions& round) override;

  const SurrogateParams& surrogate_params() const override { return params_.surrogate; }
  const LyapunovFn& lyapunov() const override { return params_.phi; }
  std::string name() const override { return "bfw-tvc"; }

  const Vector& y_hat() const { return y_hat_; }
  const ShrunkSet& shrunk() const { return shrunk_; }
  long block() const { return block_m_; }
  int epoch() const { return epoch_; }
  double g_tilde() const { return g_tilde_; }
  double eta() const { return eta_; }
  const Vector& grad_sum() const { return grad_sum_; }
  const Vector& anchor() const { return anchor_; }
  long last_block_terms() const { return last_block_terms_; }
  long last_inner_iters() const { return last_inner_iters_; }
  double last_gap() const { return last_gap_; }

  // Exposed for tests: block-end update from an explicit block estimate.
  void block_end(const Vector& block_grad, double block_bound);

 private:
  ProblemMeta meta_;
  BfwParams params_;
  ShrunkSet shrunk_;
  SphereSampler sampler_;
  CcvTracker tracker_;
  Vector y_hat_;
  long block_m_ = 1;
  long in_block_ = 0;
  Vector buffer_;
  double block_bound_ = 0.0;
  int epoch_ = 1;
  double g_tilde_ = 1.0;
  long epoch_start_block_ = 1;
  double eta_ = 0.0;
  Vector grad_sum_;
  Vector anchor_;
  long t_ = 0;
  long last_block_terms_ = 0;
  long last_inner_iters_ = 0;
  double last_gap_ = 0.0;
  double last_sigma_ = 0.0;
};

struct ScbfwParams {
  SurrogateParams surrogate;
  LyapunovFn phi = LyapunovFn::Quad();
  double c = 1.0;
  double delta = 0.5;
  long block_k = 1;
  long inner_l = 1;
};

// K = L = ceil(T^{2/3}), delta = c T^{-1/3}, Phi = x^2, c defaults to r/2.
// Appendix variant: beta = 1, gamma = 16/alpha (8 ln T^{1/3} + C) G^2 T^{2/3}
// with C = 8 + 3c + cD/r + 12D. Theorem variant: beta = 1/(G D T^{2/3}),
// gamma = G/(G + alpha D).
ScbfwParams scbfw_defaults(const ProblemMeta& meta, std::optional<double> c = {},
                           BetaVariant variant = BetaVariant::kAppendix);

void validate(const ScbfwParams& params, const ProblemMeta& meta);

class ScbfwTvc final : public Learner {
 public:
  ScbfwTvc(const ProblemMeta& meta, const ScbfwParams& params, std::uint64_t seed);

  RoundDiag step(const RoundFunctions& round) override;

  const SurrogateParams& surrogate_params() const override { return params_.surrogate; }
  const LyapunovFn& lyapunov() const override { return params_.phi; }
  std::string name() const override { return "scbfw-tvc"; }

  const Vector& y_hat() const { return y_hat_; }
  const ShrunkSet& shrunk() const { return shrunk_; }
  long block() const { return block_m_; }
  const Vector& grad_sum() const { return grad_sum_; }
  long last_block_terms() const { return last_block_terms_; }
  // gamma * beta * alpha * t / 2 at the last block end.
  double c3() const { return c3_; }
  double objective(const Vector& y) const { return grad_sum_.dot(y) + c3_ * y.squaredNorm(); }

  void block_end(const Vector& block_grad, long t);

 private:
  ProblemMeta meta_;
  ScbfwParams params_;
  ShrunkSet shrunk_;
  SphereSampler sampler_;
  CcvTracker tracker_;
  Vector y_hat_;
  long block_m_ = 1;
  long in_block_ = 0;
  Vector buffer_;
  Vector grad_sum_;
  double c3_ = 0.0;
  long t_ = 0;
  long last_block_terms_ = 0;
  double last_sigma_ = 0.0;
};

}  // namespace cocofw
