#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "cocofw/geometry.hpp"

namespace cocofw {

// Uniform directions on the unit sphere of R^d (normalised Gaussians).
class SphereSampler {
 public:
  SphereSampler(int dim, std::uint64_t seed);

  Vector sample();
  int dimension() const { return dim_; }
  std::mt19937_64& engine() { return rng_; }

 private:
  int dim_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Uniform point of the unit ball: Gaussian direction scaled by U^{1/d}.
Vector sample_unit_ball(int dim, std::mt19937_64& rng);

// (d / delta) * value * u
Vector one_point_grad(double value, const Vector& u, int d, double delta);

// y + delta * u
Vector play_point(const Vector& y, double delta, const Vector& u);

struct SmoothedValue {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo mean of f(x + delta*w) over w uniform in the unit ball. Test
// oracle for the smoothed function; not used by the learners.
SmoothedValue smoothed_value_mc(const std::function<double(const Vector&)>& f, const Vector& x,
                                double delta, long n_samples, std::mt19937_64& rng);

struct BlockSchedule {
  long horizon = 0;
  long block_size = 0;
  // 1-based inclusive (start, end) rounds.
  std::vector<std::pair<long, long>> blocks;
};

BlockSchedule make_blocks(long T, long K);

}  // namespace cocofw
