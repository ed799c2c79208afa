#pragma once

#include <string>

#include "cocofw/geometry.hpp"
#include "cocofw/lyapunov.hpp"
#include "cocofw/objectives.hpp"

namespace cocofw {

// What a learner reports after playing one round.
struct RoundDiag {
  Vector x;  // the played decision
  double f_value = 0.0;
  double g_value = 0.0;
  double q = 0.0;
  double surrogate_value = 0.0;  // surrogate loss at the played point
  int epoch = 1;
  double g_tilde = 0.0;  // 0 for learners without a doubling estimate
  // Max of beta*G*(gamma + Phi'(beta*Q_tau)) over the rounds the current
  // g_tilde has been checked against (0 if not applicable).
  double grad_bound = 0.0;
  long block = 0;  // 0 for full-information learners
  double sigma = 0.0;
  bool clamped = false;
  bool phi_saturated = false;
  bool drift_ok = true;
  bool doubling_checked = false;  // a doubling check completed this round
};

class Learner {
 public:
  virtual ~Learner() = default;

  // Plays the current decision on the round's functions and updates state.
  virtual RoundDiag step(const RoundFunctions& round) = 0;

  virtual const SurrogateParams& surrogate_params() const = 0;
  virtual const LyapunovFn& lyapunov() const = 0;
  virtual std::string name() const = 0;
};

}  // namespace cocofw
