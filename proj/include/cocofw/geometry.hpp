#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace cocofw {

using Vector = Eigen::VectorXd;

enum class SetKind { kL2Ball, kBox, kSimplex, kTraceNormBall };

std::string_view to_string(SetKind kind);

// Origin-centred compact convex set with r*B <= K <= R*B. Trace-norm points
// are flattened column-major matrices of shape rows x cols.
class FeasibleSet {
 public:
  static FeasibleSet L2Ball(int dim, double radius);
  static FeasibleSet Box(int dim, double half_width);
  // Probability simplex of the given scale, translated so its centroid sits
  // at the origin. Lives in the hyperplane sum(x) = 0.
  static FeasibleSet Simplex(int dim, double scale);
  // Nuclear-norm ball. inner_radius defaults to bound / sqrt(min(rows, cols)).
  static FeasibleSet TraceNormBall(int rows, int cols, double bound,
                                   std::optional<double> inner_radius = {});

  SetKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  // Kind-specific size parameter: ball radius, box half-width, simplex
  // scale or trace-norm bound.
  double radius() const { return param_; }
  double inner_radius() const { return inner_; }
  double outer_radius() const { return outer_; }
  double diameter() const { return 2.0 * outer_; }

 private:
  FeasibleSet(SetKind kind, int dim, int rows, int cols, double param,
              double inner, double outer);

  SetKind kind_;
  int dim_;
  int rows_;
  int cols_;
  double param_;
  double inner_;
  double outer_;
};

// argmin_{x in K} <direction, x>. A zero direction returns the origin.
Vector lmo(const FeasibleSet& set, const Vector& direction);

bool contains(const FeasibleSet& set, const Vector& point, double tol);

// (1 - delta/r) K, the region from which y + delta*u stays inside K.
class ShrunkSet {
 public:
  ShrunkSet(FeasibleSet base, double delta);

  const FeasibleSet& base() const { return base_; }
  double delta() const { return delta_; }
  double scale() const { return scale_; }

 private:
  FeasibleSet base_;
  double delta_;
  double scale_;
};

Vector lmo_shrunk(const ShrunkSet& shrunk, const Vector& direction);

bool contains(const ShrunkSet& shrunk, const Vector& point, double tol);

// Random member of the set (not uniform). Used by property checks.
Vector sample_member(const FeasibleSet& set, std::mt19937_64& rng);

struct SingularPair {
  double value = 0.0;
  Vector left;
  Vector right;
  int iterations = 0;
};

// Top singular triple of a rows x cols matrix by power iteration on A^T A.
SingularPair top_singular_pair(const Eigen::Ref<const Eigen::MatrixXd>& a);

}  // namespace cocofw
