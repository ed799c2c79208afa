#include "cocofw/bandit_core.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cocofw {

SphereSampler::SphereSampler(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {
  if (dim < 1) throw std::invalid_argument("SphereSampler: dimension must be >= 1");
}

Vector SphereSampler::sample() {
  Vector u(dim_);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim_; ++i) u[i] = normal_(rng_);
    norm = u.norm();
  } while (norm == 0.0);
  return u / norm;
}

Vector sample_unit_ball(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector w(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) w[i] = normal(rng);
    norm = w.norm();
  } while (norm == 0.0);
  return std::pow(unit(rng), 1.0 / dim) / norm * w;
}

Vector one_point_grad(double value, const Vector& u, int d, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("one_point_grad: delta must be > 0");
  return (d / delta * value) * u;
}

Vector play_point(const Vector& y, double delta, const Vector& u) { return y + delta * u; }

SmoothedValue smoothed_value_mc(const std::function<double(const Vector&)>& f, const Vector& x,
                                double delta, long n_samples, std::mt19937_64& rng) {
  if (n_samples < 1) throw std::invalid_argument("smoothed_value_mc: need at least one sample");
  const int d = static_cast<int>(x.size());
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  double sum = 0.0;
  for (auto& v : values) {
    v = f(x + delta * sample_unit_ball(d, rng));
    sum += v;
  }
  const double mean = sum / n_samples;
  // Two passes so a constant function reports an exact zero error.
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = n_samples > 1 ? ss / (n_samples - 1) : 0.0;
  return {mean, std::sqrt(var / n_samples)};
}

BlockSchedule make_blocks(long T, long K) {
  if (K < 1) throw std::invalid_argument("make_blocks: block size must be >= 1");
  if (T < K) throw std::invalid_argument("make_blocks: block size exceeds the horizon");
  BlockSchedule s{T, K, {}};
  for (long start = 1; start <= T; start += K) s.blocks.emplace_back(start, std::min(T, start + K - 1));
  return s;
}

}  // namespace cocofw
