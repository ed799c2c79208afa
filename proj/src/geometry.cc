#include "cocofw/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cocofw {
namespace {

constexpr int kPowerIterationMaxIters = 1000;
constexpr double kPowerIterationTol = 1e-10;
constexpr double kPowerIterationJitter = 1e-6;
constexpr std::uint64_t kPowerIterationSeed = 0x9E3779B97F4A7C15ULL;

void check_direction(const FeasibleSet& set, const Vector& direction) {
  if (direction.size() != set.dimension()) {
    throw std::invalid_argument("lmo: direction has dimension " +
                                std::to_string(direction.size()) + ", set has " +
                                std::to_string(set.dimension()));
  }
  if (!direction.allFinite()) {
    throw std::invalid_argument("lmo: direction has non-finite entries");
  }
}

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

double nuclear_norm(const Vector& flat, int rows, int cols) {
  Eigen::Map<const Eigen::MatrixXd> m(flat.data(), rows, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

}  // namespace

std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::kL2Ball:
      return "l2-ball";
    case SetKind::kBox:
      return "box";
    case SetKind::kSimplex:
      return "simplex";
    case SetKind::kTraceNormBall:
      return "trace-norm-ball";
  }
  return "unknown";
}

FeasibleSet::FeasibleSet(SetKind kind, int dim, int rows, int cols, double param,
                         double inner, double outer)
    : kind_(kind), dim_(dim), rows_(rows), cols_(cols), param_(param), inner_(inner),
      outer_(outer) {}

FeasibleSet FeasibleSet::L2Ball(int dim, double radius) {
  if (dim < 1) throw std::invalid_argument("L2Ball: dimension must be >= 1");
  check_positive(radius, "L2Ball radius");
  return {SetKind::kL2Ball, dim, dim, 1, radius, radius, radius};
}

FeasibleSet FeasibleSet::Box(int dim, double half_width) {
  if (dim < 1) throw std::invalid_argument("Box: dimension must be >= 1");
  check_positive(half_width, "Box half-width");
  return {SetKind::kBox, dim, dim, 1, half_width, half_width,
          half_width * std::sqrt(static_cast<double>(dim))};
}

FeasibleSet FeasibleSet::Simplex(int dim, double scale) {
  if (dim < 2) throw std::invalid_argument("Simplex: dimension must be >= 2");
  check_positive(scale, "Simplex scale");
  const double d = dim;
  return {SetKind::kSimplex, dim, dim, 1, scale, scale / std::sqrt(d * (d - 1.0)),
          scale * std::sqrt((d - 1.0) / d)};
}

FeasibleSet FeasibleSet::TraceNormBall(int rows, int cols, double bound,
                                       std::optional<double> inner_radius) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("TraceNormBall: shape must be positive");
  }
  check_positive(bound, "TraceNormBall bound");
  const double inner =
      inner_radius.value_or(bound / std::sqrt(static_cast<double>(std::min(rows, cols))));
  check_positive(inner, "TraceNormBall inner radius");
  if (inner > bound) {
    throw std::invalid_argument("TraceNormBall: inner radius exceeds the outer radius");
  }
  return {SetKind::kTraceNormBall, rows * cols, rows, cols, bound, inner, bound};
}

SingularPair top_singular_pair(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  const Eigen::Index n = a.cols();
  std::mt19937_64 rng(kPowerIterationSeed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (Eigen::Index i = 0; i < n; ++i) v[i] += kPowerIterationJitter * normal(rng);
  v.normalize();

  SingularPair out;
  for (int it = 1; it <= kPowerIterationMaxIters; ++it) {
    Vector w = a.transpose() * (a * v);
    const double norm = w.norm();
    out.iterations = it;
    if (norm == 0.0) break;
    w /= norm;
    const double change = (w - v).norm();
    v = std::move(w);
    if (change < kPowerIterationTol) break;
  }

  Vector u = a * v;
  out.value = u.norm();
  if (out.value > 0.0) u /= out.value;
  out.left = std::move(u);
  out.right = std::move(v);
  return out;
}

Vector lmo(const FeasibleSet& set, const Vector& direction) {
  check_direction(set, direction);
  const int d = set.dimension();
  Vector out = Vector::Zero(d);
  if (direction.isZero(0.0)) return out;

  switch (set.kind()) {
    case SetKind::kL2Ball:
      out = -set.radius() / direction.norm() * direction;
      break;
    case SetKind::kBox:
      for (int i = 0; i < d; ++i) {
        if (direction[i] > 0.0) {
          out[i] = -set.radius();
        } else if (direction[i] < 0.0) {
          out[i] = set.radius();
        }
      }
      break;
    case SetKind::kSimplex: {
      Eigen::Index best = 0;
      const double lo = direction.minCoeff(&best);
      // A constant direction is orthogonal to the centred hyperplane.
      if (lo == direction.maxCoeff()) break;
      out.setConstant(-set.radius() / d);
      out[best] += set.radius();
      break;
    }
    case SetKind::kTraceNormBall: {
      Eigen::Map<const Eigen::MatrixXd> g(direction.data(), set.rows(), set.cols());
      const SingularPair top = top_singular_pair(g);
      if (top.value == 0.0) break;
      Eigen::Map<Eigen::MatrixXd> x(out.data(), set.rows(), set.cols());
      x.noalias() = -set.radius() * top.left * top.right.transpose();
      break;
    }
  }
  return out;
}

bool contains(const FeasibleSet& set, const Vector& point, double tol) {
  if (point.size() != set.dimension()) {
    throw std::invalid_argument("contains: point has dimension " +
                                std::to_string(point.size()) + ", set has " +
                                std::to_string(set.dimension()));
  }
  if (!point.allFinite()) return false;
  switch (set.kind()) {
    case SetKind::kL2Ball:
      return point.norm() <= set.radius() + tol;
    case SetKind::kBox:
      return point.cwiseAbs().maxCoeff() <= set.radius() + tol;
    case SetKind::kSimplex: {
      const double floor = -set.radius() / set.dimension();
      return point.minCoeff() >= floor - tol && std::abs(point.sum()) <= tol;
    }
    case SetKind::kTraceNormBall:
      return nuclear_norm(point, set.rows(), set.cols()) <= set.radius() + tol;
  }
  return false;
}

ShrunkSet::ShrunkSet(FeasibleSet base, double delta)
    : base_(std::move(base)), delta_(delta), scale_(0.0) {
  if (base_.kind() == SetKind::kSimplex) {
    throw std::invalid_argument(
        "ShrunkSet: the centred simplex has empty interior; no delta-ball fits inside");
  }
  if (!(delta > 0.0) || !(delta < base_.inner_radius())) {
    throw std::invalid_argument("ShrunkSet: delta must satisfy 0 < delta < r (delta = " +
                                std::to_string(delta) +
                                ", r = " + std::to_string(base_.inner_radius()) + ")");
  }
  scale_ = 1.0 - delta / base_.inner_radius();
}

Vector lmo_shrunk(const ShrunkSet& shrunk, const Vector& direction) {
  return shrunk.scale() * lmo(shrunk.base(), direction);
}

bool contains(const ShrunkSet& shrunk, const Vector& point, double tol) {
  return contains(shrunk.base(), point / shrunk.scale(), tol);
}

Vector sample_member(const FeasibleSet& set, std::mt19937_64& rng) {
  const int d = set.dimension();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector out(d);
  switch (set.kind()) {
    case SetKind::kL2Ball: {
      for (int i = 0; i < d; ++i) out[i] = normal(rng);
      const double norm = out.norm();
      const double radius = set.radius() * std::pow(unit(rng), 1.0 / d);
      out *= norm > 0.0 ? radius / norm : 0.0;
      break;
    }
    case SetKind::kBox: {
      std::uniform_real_distribution<double> coord(-set.radius(), set.radius());
      for (int i = 0; i < d; ++i) out[i] = coord(rng);
      break;
    }
    case SetKind::kSimplex: {
      std::exponential_distribution<double> expo(1.0);
      for (int i = 0; i < d; ++i) out[i] = expo(rng);
      out *= set.radius() / out.sum();
      out.array() -= set.radius() / d;
      break;
    }
    case SetKind::kTraceNormBall: {
      for (int i = 0; i < d; ++i) out[i] = normal(rng);
      const double nuc = nuclear_norm(out, set.rows(), set.cols());
      out *= nuc > 0.0 ? set.radius() * unit(rng) / nuc : 0.0;
      break;
    }
  }
  return out;
}

}  // namespace cocofw
