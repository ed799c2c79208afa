#include "cocofw/objectives.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cocofw/frank_wolfe.hpp"

namespace cocofw {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kComparatorIters = 20000;
// Upper bound on stored dense constraint coefficients (rows * cols * T).
constexpr double kMaxDenseEntries = 6e7;

Vector uniform_cube(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = coord(rng);
  return v;
}

Vector rescaled(const Vector& v, double norm) {
  const double n = v.norm();
  if (n == 0.0 || norm == 0.0) return Vector::Zero(v.size());
  return (norm / n) * v;
}

int flat_index(int row, int col, int rows) { return row + col * rows; }

// argmin over K of ||x - target||^2.
Vector nearest_point(const FeasibleSet& set, const Vector& target) {
  switch (set.kind()) {
    case SetKind::kL2Ball: {
      const double n = target.norm();
      return n <= set.radius() ? target : Vector(set.radius() / n * target);
    }
    case SetKind::kBox:
      return target.cwiseMax(-set.radius()).cwiseMin(set.radius());
    default: {
      AggregateLoss sq{Vector::Constant(target.size(), 2.0), -2.0 * target, target.squaredNorm()};
      return offline_frank_wolfe(sq, set, kComparatorIters);
    }
  }
}

struct ConstraintDraw {
  std::vector<Vector> p;
  std::vector<double> slack;
};

// Offsets b_t = <p_t, x*> + slack_t, so g_t(x*) = a - fl(a + s) <= 0 exactly.
std::vector<RoundFunctions> attach_constraints(std::vector<Loss> losses, ConstraintDraw draw,
                                               const std::optional<Vector>& comparator) {
  std::vector<RoundFunctions> rounds;
  rounds.reserve(losses.size());
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const double b = comparator ? draw.p[t].dot(*comparator) + draw.slack[t] : 0.0;
    rounds.emplace_back(std::move(losses[t]), AffineConstraint{std::move(draw.p[t]), b});
  }
  return rounds;
}

double nuclear_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().sum();
}

// P_t uniform on [-1, 1]^{cols x rows}; stored as the functional X -> Tr(P_t X)
// on column-major X, i.e. vec(P_t^T).
Vector draw_trace_functional(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::MatrixXd p(cols, rows);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = coord(rng);
  Eigen::MatrixXd pt = p.transpose();
  return Eigen::Map<const Vector>(pt.data(), pt.size());
}

void check_dense_budget(int rows, int cols, long horizon) {
  if (static_cast<double>(rows) * cols * horizon > kMaxDenseEntries) {
    throw std::invalid_argument("matrix problem too large for dense storage: " +
                                std::to_string(rows) + "x" + std::to_string(cols) + " over " +
                                std::to_string(horizon) + " rounds");
  }
}

}  // namespace

RoundFunctions::RoundFunctions(Loss loss, AffineConstraint constraint)
    : loss_(std::move(loss)), constraint_(std::move(constraint)) {}

double RoundFunctions::loss_value(const Vector& x) const {
  return std::visit(
      Overloaded{
          [&](const LinearLoss& l) { return l.c.dot(x); },
          [&](const QuadraticLoss& l) {
            return 0.5 * l.alpha * (x - l.center).squaredNorm() + l.c.dot(x);
          },
          [&](const CompletionLoss& l) {
            double sum = 0.0;
            for (const Observation& o : l.observations) {
              const double r = x[flat_index(o.row, o.col, l.rows)] - o.value;
              sum += r * r;
            }
            return 0.5 * sum;
          },
      },
      loss_);
}

Vector RoundFunctions::loss_subgrad(const Vector& x) const {
  return std::visit(
      Overloaded{
          [&](const LinearLoss& l) -> Vector { return l.c; },
          [&](const QuadraticLoss& l) -> Vector { return l.alpha * (x - l.center) + l.c; },
          [&](const CompletionLoss& l) -> Vector {
            Vector g = Vector::Zero(x.size());
            for (const Observation& o : l.observations) {
              const int i = flat_index(o.row, o.col, l.rows);
              g[i] += x[i] - o.value;
            }
            return g;
          },
      },
      loss_);
}

double RoundFunctions::constraint_value(const Vector& x) const {
  return constraint_.p.dot(x) - constraint_.b;
}

void validate(const ProblemMeta& meta) {
  if (!(meta.lipschitz_G > 0.0)) throw std::invalid_argument("ProblemMeta: G must be > 0");
  if (!(meta.value_bound_M > 0.0)) throw std::invalid_argument("ProblemMeta: M must be > 0");
  if (!(meta.strong_convexity_alpha >= 0.0)) {
    throw std::invalid_argument("ProblemMeta: alpha_f must be >= 0");
  }
  if (meta.horizon_T < 1) throw std::invalid_argument("ProblemMeta: T must be >= 1");
}

ProblemStream::ProblemStream(ProblemMeta meta, std::uint64_t seed,
                             std::vector<RoundFunctions> rounds,
                             std::optional<Vector> comparator_hint)
    : meta_(std::move(meta)), seed_(seed), rounds_(std::move(rounds)),
      hint_(std::move(comparator_hint)) {
  if (static_cast<long>(rounds_.size()) != meta_.horizon_T) {
    throw std::logic_error("ProblemStream: round count differs from the horizon");
  }
}

const RoundFunctions& ProblemStream::next() {
  if (done()) throw std::out_of_range("ProblemStream: all rounds consumed");
  return rounds_[cursor_++];
}

ProblemStream gen_synthetic(const ProblemMeta& meta_in, std::uint64_t seed, SyntheticMode mode,
                            const SyntheticOptions& options) {
  ProblemMeta meta = meta_in;
  validate(meta);
  if (options.drift < 0.0 || options.drift > 1.0) {
    throw std::invalid_argument("gen_synthetic: drift must lie in [0, 1]");
  }
  if (options.slack_max < 0.0) {
    throw std::invalid_argument("gen_synthetic: slack_max must be >= 0");
  }
  const FeasibleSet& set = meta.set;
  const int d = set.dimension();
  const double G = meta.lipschitz_G;
  const double D = set.diameter();
  const double R = set.outer_radius();
  const double r = set.inner_radius();
  const long T = meta.horizon_T;

  double loss_norm = G;
  if (mode == SyntheticMode::kLinear) {
    meta.strong_convexity_alpha = 0.0;
    meta.value_bound_M = G * R;
    if (meta.name.empty()) meta.name = "synthetic-linear";
  } else {
    const double alpha = meta.strong_convexity_alpha;
    if (!(alpha > 0.0)) {
      throw std::invalid_argument("gen_synthetic: quadratic mode needs alpha_f > 0");
    }
    if (alpha * D > G) {
      throw std::invalid_argument("gen_synthetic: infeasible configuration, alpha_f * D = " +
                                  std::to_string(alpha * D) + " exceeds G = " +
                                  std::to_string(G));
    }
    loss_norm = G - alpha * D;
    meta.value_bound_M = 0.5 * alpha * D * D + loss_norm * R;
    if (meta.name.empty()) meta.name = "synthetic-quadratic";
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> slack(0.0, options.slack_max);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Vector mu = uniform_cube(d, rng);
  const Vector center0 = rescaled(mu, options.drift * 0.5 * r);

  std::vector<Loss> losses;
  losses.reserve(T);
  ConstraintDraw draw;
  draw.p.reserve(T);
  draw.slack.reserve(T);
  Vector c_sum = Vector::Zero(d);
  Vector center_sum = Vector::Zero(d);
  for (long t = 0; t < T; ++t) {
    const Vector xi = uniform_cube(d, rng);
    Vector c = rescaled(options.drift * mu + (1.0 - options.drift) * xi, loss_norm);
    draw.p.push_back(rescaled(uniform_cube(d, rng), G));
    c_sum += c;
    if (mode == SyntheticMode::kLinear) {
      losses.emplace_back(LinearLoss{std::move(c)});
    } else {
      Vector jitter(d);
      for (int i = 0; i < d; ++i) jitter[i] = normal(rng);
      jitter = rescaled(jitter, 0.5 * r * std::pow(unit(rng), 1.0 / d));
      Vector center = center0 + jitter;
      center_sum += center;
      losses.emplace_back(QuadraticLoss{meta.strong_convexity_alpha, std::move(center), std::move(c)});
    }
    draw.slack.push_back(slack(rng));
  }

  Vector x_star;
  if (mode == SyntheticMode::kLinear) {
    x_star = lmo(set, c_sum);
  } else {
    const double alpha = meta.strong_convexity_alpha;
    x_star = nearest_point(set, (center_sum - c_sum / alpha) / static_cast<double>(T));
  }
  auto rounds = attach_constraints(std::move(losses), std::move(draw), x_star);
  return ProblemStream(std::move(meta), seed, std::move(rounds), std::move(x_star));
}

ProblemStream gen_matrix_completion(const CompletionOptions& o, std::uint64_t seed) {
  if (o.rows < 1 || o.cols < 1 || o.rows > 64 || o.cols > 64) {
    throw std::invalid_argument("gen_matrix_completion: shape must be within 1..64");
  }
  if (o.rank < 1 || o.rank > std::min(o.rows, o.cols)) {
    throw std::invalid_argument("gen_matrix_completion: rank must be in [1, min(m, n)]");
  }
  const int entries = o.rows * o.cols;
  if (o.obs_per_round < 1 || o.obs_per_round > entries) {
    throw std::invalid_argument("gen_matrix_completion: obs_per_round must be in [1, m*n]");
  }
  if (o.horizon_T < 1) throw std::invalid_argument("gen_matrix_completion: T must be >= 1");
  check_dense_budget(o.rows, o.cols, o.horizon_T);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> slack(0.0, o.slack_max);

  Eigen::MatrixXd u(o.rows, o.rank);
  Eigen::MatrixXd v(o.cols, o.rank);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  const Eigen::MatrixXd target = u * v.transpose() / std::sqrt(static_cast<double>(o.rank));
  const double target_nuclear = nuclear_norm(target);
  const double tau = o.trace_bound.value_or(target_nuclear);

  ProblemMeta meta;
  meta.name = "matrix-completion";
  meta.set = FeasibleSet::TraceNormBall(o.rows, o.cols, tau, o.inner_radius);
  meta.horizon_T = o.horizon_T;
  meta.strong_convexity_alpha = 1.0;
  const double residual = tau + target.cwiseAbs().maxCoeff();
  meta.lipschitz_G =
      std::max(std::sqrt(static_cast<double>(o.obs_per_round)) * residual,
               std::sqrt(static_cast<double>(entries)));
  meta.value_bound_M = 0.5 * o.obs_per_round * residual * residual;

  std::vector<int> perm(entries);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Loss> losses;
  losses.reserve(o.horizon_T);
  ConstraintDraw draw;
  for (long t = 0; t < o.horizon_T; ++t) {
    CompletionLoss loss{o.rows, o.cols, {}};
    loss.observations.reserve(o.obs_per_round);
    for (int k = 0; k < o.obs_per_round; ++k) {
      std::uniform_int_distribution<int> pick(k, entries - 1);
      std::swap(perm[k], perm[pick(rng)]);
      const int row = perm[k] % o.rows;
      const int col = perm[k] / o.rows;
      loss.observations.push_back({row, col, target(row, col)});
    }
    losses.emplace_back(std::move(loss));
    draw.p.push_back(draw_trace_functional(o.rows, o.cols, rng));
    draw.slack.push_back(slack(rng));
  }

  std::optional<Vector> x_star;
  if (o.offset_mode == OffsetMode::kFeasible) {
    if (target_nuclear <= tau) {
      x_star = Eigen::Map<const Vector>(target.data(), target.size());
    } else {
      std::vector<RoundFunctions> tmp;
      for (const Loss& l : losses) tmp.emplace_back(l, AffineConstraint{Vector::Zero(entries), 0.0});
      x_star = offline_frank_wolfe(aggregate(tmp), meta.set, kComparatorIters);
    }
  }
  auto rounds = attach_constraints(std::move(losses), std::move(draw), x_star);
  return ProblemStream(std::move(meta), seed, std::move(rounds), std::move(x_star));
}

std::vector<Rating> parse_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file: " + path.string());
  std::vector<Rating> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    auto fail = [&](const std::string& why) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 3 || fields.size() > 4) fail("expected user<TAB>item<TAB>rating<TAB>timestamp");
    long user = 0;
    long item = 0;
    auto parse_id = [&](const std::string& s, long& v, const char* what) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
        fail(std::string("bad ") + what + " id '" + s + "'");
      }
    };
    parse_id(fields[0], user, "user");
    parse_id(fields[1], item, "item");
    double rating = 0.0;
    try {
      std::size_t used = 0;
      rating = std::stod(fields[2], &used);
      if (used != fields[2].size() || !std::isfinite(rating)) fail("bad rating '" + fields[2] + "'");
    } catch (const std::logic_error&) {
      fail("bad rating '" + fields[2] + "'");
    }
    out.push_back({static_cast<int>(user - 1), static_cast<int>(item - 1), rating});
  }
  return out;
}

ProblemStream load_movielens(const std::filesystem::path& path, const MovieLensOptions& o,
                             std::uint64_t seed) {
  const std::vector<Rating> ratings = parse_ratings(path);
  if (ratings.empty()) throw std::invalid_argument("load_movielens: no ratings in " + path.string());
  if (o.horizon_T < 1 || o.obs_per_round < 1) {
    throw std::invalid_argument("load_movielens: T and obs_per_round must be >= 1");
  }
  const long needed = o.horizon_T * o.obs_per_round;
  if (static_cast<long>(ratings.size()) < needed) {
    throw std::invalid_argument("load_movielens: " + std::to_string(ratings.size()) +
                                " ratings, need T * obs_per_round = " + std::to_string(needed));
  }
  int rows = 0;
  int cols = 0;
  for (const Rating& r : ratings) {
    rows = std::max(rows, r.row + 1);
    cols = std::max(cols, r.col + 1);
  }
  check_dense_budget(rows, cols, o.horizon_T);

  ProblemMeta meta;
  meta.name = "movielens-file";
  meta.set = FeasibleSet::TraceNormBall(rows, cols, o.trace_bound, o.inner_radius);
  meta.horizon_T = o.horizon_T;
  meta.strong_convexity_alpha = 1.0;
  double max_rating = 0.0;
  for (const Rating& r : ratings) max_rating = std::max(max_rating, std::abs(r.value));
  const double residual = o.trace_bound + max_rating;
  meta.lipschitz_G = std::max(std::sqrt(static_cast<double>(o.obs_per_round)) * residual,
                              std::sqrt(static_cast<double>(rows) * cols));
  meta.value_bound_M = 0.5 * o.obs_per_round * residual * residual;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> slack(0.0, o.slack_max);
  std::vector<Loss> losses;
  ConstraintDraw draw;
  std::size_t next = 0;
  for (long t = 0; t < o.horizon_T; ++t) {
    CompletionLoss loss{rows, cols, {}};
    for (int k = 0; k < o.obs_per_round; ++k, ++next) {
      loss.observations.push_back({ratings[next].row, ratings[next].col, ratings[next].value});
    }
    losses.emplace_back(std::move(loss));
    draw.p.push_back(draw_trace_functional(rows, cols, rng));
    draw.slack.push_back(slack(rng));
  }

  std::optional<Vector> x_star;
  if (o.offset_mode == OffsetMode::kFeasible) {
    std::vector<RoundFunctions> tmp;
    for (const Loss& l : losses) tmp.emplace_back(l, AffineConstraint{Vector::Zero(rows * cols), 0.0});
    x_star = offline_frank_wolfe(aggregate(tmp), meta.set, kComparatorIters);
  }
  auto rounds = attach_constraints(std::move(losses), std::move(draw), x_star);
  return ProblemStream(std::move(meta), seed, std::move(rounds), std::move(x_star));
}

double AggregateLoss::value(const Vector& x) const {
  return 0.5 * x.dot(hess.cwiseProduct(x)) + lin.dot(x) + constant;
}

Vector AggregateLoss::gradient(const Vector& x) const { return hess.cwiseProduct(x) + lin; }

AggregateLoss aggregate(std::span<const RoundFunctions> rounds) {
  if (rounds.empty()) throw std::invalid_argument("aggregate: no rounds");
  const int d = rounds.front().dimension();
  AggregateLoss agg{Vector::Zero(d), Vector::Zero(d), 0.0};
  for (const RoundFunctions& f : rounds) {
    std::visit(Overloaded{
                   [&](const LinearLoss& l) { agg.lin += l.c; },
                   [&](const QuadraticLoss& l) {
                     agg.hess.array() += l.alpha;
                     agg.lin += l.c - l.alpha * l.center;
                     agg.constant += 0.5 * l.alpha * l.center.squaredNorm();
                   },
                   [&](const CompletionLoss& l) {
                     for (const Observation& o : l.observations) {
                       const int i = flat_index(o.row, o.col, l.rows);
                       agg.hess[i] += 1.0;
                       agg.lin[i] -= o.value;
                       agg.constant += 0.5 * o.value * o.value;
                     }
                   },
               },
               f.loss());
  }
  return agg;
}

}  // namespace cocofw
