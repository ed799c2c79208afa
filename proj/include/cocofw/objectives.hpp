#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cocofw/geometry.hpp"

namespace cocofw {

inline double g_plus(double value) { return value > 0.0 ? value : 0.0; }

// f(x) = <c, x>
struct LinearLoss {
  Vector c;
};

// f(x) = (alpha/2) ||x - center||^2 + <c, x>
struct QuadraticLoss {
  double alpha = 0.0;
  Vector center;
  Vector c;
};

struct Observation {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// f(X) = 1/2 sum_{(i,j) in obs} (X_ij - value_ij)^2 on a column-major X.
struct CompletionLoss {
  int rows = 0;
  int cols = 0;
  std::vector<Observation> observations;
};

using Loss = std::variant<LinearLoss, QuadraticLoss, CompletionLoss>;

// g(x) = <p, x> - b
struct AffineConstraint {
  Vector p;
  double b = 0.0;
};

// One round's loss f_t and constraint g_t.
class RoundFunctions {
 public:
  RoundFunctions(Loss loss, AffineConstraint constraint);

  double loss_value(const Vector& x) const;
  Vector loss_subgrad(const Vector& x) const;
  double constraint_value(const Vector& x) const;
  const Vector& constraint_subgrad(const Vector& /*x*/) const { return constraint_.p; }

  const Loss& loss() const { return loss_; }
  const AffineConstraint& constraint() const { return constraint_; }
  int dimension() const { return static_cast<int>(constraint_.p.size()); }

 private:
  Loss loss_;
  AffineConstraint constraint_;
};

struct ProblemMeta {
  std::string name;
  double lipschitz_G = 1.0;
  double value_bound_M = 1.0;
  double strong_convexity_alpha = 0.0;
  long horizon_T = 1;
  FeasibleSet set = FeasibleSet::L2Ball(1, 1.0);
};

void validate(const ProblemMeta& meta);

// Materialised, deterministic sequence of T rounds with a single-consumer
// cursor.
class ProblemStream {
 public:
  ProblemStream(ProblemMeta meta, std::uint64_t seed, std::vector<RoundFunctions> rounds,
                std::optional<Vector> comparator_hint);

  const ProblemMeta& meta() const { return meta_; }
  std::uint64_t seed() const { return seed_; }
  const std::optional<Vector>& comparator_hint() const { return hint_; }
  std::span<const RoundFunctions> rounds() const { return rounds_; }
  long size() const { return static_cast<long>(rounds_.size()); }

  bool done() const { return cursor_ >= rounds_.size(); }
  const RoundFunctions& next();
  void rewind() { cursor_ = 0; }

 private:
  ProblemMeta meta_;
  std::uint64_t seed_;
  std::vector<RoundFunctions> rounds_;
  std::optional<Vector> hint_;
  std::size_t cursor_ = 0;
};

enum class SyntheticMode { kLinear, kQuadratic };

struct SyntheticOptions {
  // Weight of a per-stream fixed direction mixed into every c_t (and the
  // offset of the quadratic centres). 0 gives i.i.d. zero-mean losses.
  double drift = 0.0;
  double slack_max = 0.1;
};

// f_t linear or strongly convex quadratic, g_t(x) = <p_t, x> - b_t with
// b_t = <p_t, x*> + slack_t so the comparator x* is feasible every round.
ProblemStream gen_synthetic(const ProblemMeta& meta, std::uint64_t seed, SyntheticMode mode,
                            const SyntheticOptions& options = {});

enum class OffsetMode { kPaper, kFeasible };

struct CompletionOptions {
  int rows = 32;
  int cols = 32;
  int rank = 3;
  int obs_per_round = 1;
  long horizon_T = 1;
  OffsetMode offset_mode = OffsetMode::kFeasible;
  // Trace-norm bound of K; defaults to the nuclear norm of the target.
  std::optional<double> trace_bound;
  std::optional<double> inner_radius;
  double slack_max = 0.1;
};

ProblemStream gen_matrix_completion(const CompletionOptions& options, std::uint64_t seed);

struct Rating {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Tab-separated "user item rating timestamp" lines; ids are 1-based.
std::vector<Rating> parse_ratings(const std::filesystem::path& path);

struct MovieLensOptions {
  long horizon_T = 1;
  int obs_per_round = 1;
  OffsetMode offset_mode = OffsetMode::kPaper;
  double trace_bound = 1e4;
  std::optional<double> inner_radius;
  double slack_max = 0.1;
};

ProblemStream load_movielens(const std::filesystem::path& path, const MovieLensOptions& options,
                             std::uint64_t seed);

// sum_t f_t(x) = 1/2 x^T diag(hess) x + <lin, x> + constant, valid for every
// loss family above.
struct AggregateLoss {
  Vector hess;
  Vector lin;
  double constant = 0.0;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

AggregateLoss aggregate(std::span<const RoundFunctions> rounds);

}  // namespace cocofw
