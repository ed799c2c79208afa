#pragma once

#include <Eigen/Core>
#include <random>

#include "cocofw/geometry.hpp"
#include "cocofw/objectives.hpp"

namespace cocofw::testing {

// Minimiser of phi over [0, 1]: scan a 1e-6 grid, then fit a parabola through
// the best grid point and its neighbours. Uses only function values, so it is
// independent of any closed-form step rule.
template <class F>
double grid_argmin(F&& phi, double step = 1e-6) {
  const long n = static_cast<long>(1.0 / step + 0.5);
  const double h = 1.0 / n;
  long best = 0;
  double best_val = phi(0.0);
  for (long i = 1; i <= n; ++i) {
    const double v = phi(i * h);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  // Parabola through three neighbouring grid points, shifted inward at the
  // ends so a minimiser within one step of a bound is still resolved.
  const long mid = best == 0 ? 1 : (best == n ? n - 1 : best);
  const double fm = phi((mid - 1) * h);
  const double f0 = phi(mid * h);
  const double fp = phi((mid + 1) * h);
  const double curv = fp - 2.0 * f0 + fm;
  const double s0 = best * h;
  if (!(curv > 0.0)) return s0;
  const double s = mid * h - 0.5 * h * (fp - fm) / curv;
  if (s < s0 - h || s > s0 + h) return s0;
  return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
}

// min_{||X||_* <= bound} <G, X> = -bound * sigma_max(G), from a full SVD.
double trace_lmo_value_svd(const Eigen::MatrixXd& g, double bound);

// Brute-force minimum of <g, x> over many random members (upper bound on the
// true minimum).
double sampled_min_inner(const FeasibleSet& set, const Vector& g, int samples,
                         std::mt19937_64& rng);

Vector random_direction(int dim, std::mt19937_64& rng);

// L2-ball problem metadata for hand-built learners.
ProblemMeta ball_meta(int dim, double radius, double G, double M, double alpha, long T);

// Round with f(x) = <c, x> and g(x) = <p, x> - b.
RoundFunctions linear_round(const Vector& c, const Vector& p, double b);

}  // namespace cocofw::testing
