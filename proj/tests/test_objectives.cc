#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "gtest/gtest.h"

#include "cocofw/frank_wolfe.hpp"
#include "cocofw/objectives.hpp"
#include "support/oracles.hpp"

namespace cocofw {
namespace {

namespace fs = std::filesystem;

ProblemMeta synthetic_meta(int dim, double alpha, long T) {
  return testing::ball_meta(dim, 1.0, 1.0, 1.0, alpha, T);
}

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("cocofw_test_" + name);
  std::ofstream(p) << body;
  return p;
}

TEST(GPlusTest, Examples) {
  EXPECT_EQ(g_plus(-1.0), 0.0);
  EXPECT_EQ(g_plus(0.0), 0.0);
  EXPECT_EQ(g_plus(2.5), 2.5);
}

TEST(SyntheticTest, LinearComparatorIsFeasible) {
  const ProblemStream s = gen_synthetic(synthetic_meta(2, 0.0, 200), 4, SyntheticMode::kLinear);
  ASSERT_EQ(s.size(), 200);
  ASSERT_TRUE(s.comparator_hint());
  double max_g = -INFINITY;
  for (const RoundFunctions& r : s.rounds()) max_g = std::max(max_g, r.constraint_value(*s.comparator_hint()));
  EXPECT_LE(max_g, 0.0);
}

TEST(SyntheticTest, ZeroSlackMakesComparatorBoundaryFeasible) {
  SyntheticOptions opt;
  opt.slack_max = 0.0;
  const ProblemStream s = gen_synthetic(synthetic_meta(3, 0.0, 50), 9, SyntheticMode::kLinear, opt);
  for (const RoundFunctions& r : s.rounds()) {
    EXPECT_EQ(r.constraint_value(*s.comparator_hint()), 0.0);
  }
}

TEST(SyntheticTest, LinearComparatorMatchesClosedFormLmo) {
  const ProblemStream s = gen_synthetic(synthetic_meta(4, 0.0, 64), 2, SyntheticMode::kLinear);
  Vector sum = Vector::Zero(4);
  for (const RoundFunctions& r : s.rounds()) sum += std::get<LinearLoss>(r.loss()).c;
  EXPECT_LT((*s.comparator_hint() - lmo(s.meta().set, sum)).norm(), 1e-12);
}

TEST(SyntheticTest, QuadraticComparatorMinimisesAggregate) {
  const ProblemMeta meta = testing::ball_meta(3, 1.0, 3.0, 1.0, 1.0, 128);
  const ProblemStream s = gen_synthetic(meta, 5, SyntheticMode::kQuadratic);
  const AggregateLoss agg = aggregate(s.rounds());
  const double at_hint = agg.value(*s.comparator_hint());
  const Vector fw = offline_frank_wolfe(agg, meta.set, 20000);
  EXPECT_LE(at_hint, agg.value(fw) + 1e-6 * std::abs(at_hint));
}

TEST(SyntheticTest, StationaryQuadraticHasZeroRegretAtCentre) {
  const Vector a{{0.2, -0.1}};
  std::vector<RoundFunctions> rounds;
  for (int t = 0; t < 10; ++t) {
    rounds.emplace_back(QuadraticLoss{1.0, a, Vector::Zero(2)}, AffineConstraint{Vector::Zero(2), 1.0});
  }
  const AggregateLoss agg = aggregate(rounds);
  EXPECT_LT(agg.gradient(a).norm(), 1e-15);
  double played = 0.0;
  for (const RoundFunctions& r : rounds) played += r.loss_value(a);
  EXPECT_NEAR(played - agg.value(a), 0.0, 1e-15);
}

TEST(SyntheticTest, Deterministic) {
  const ProblemMeta meta = testing::ball_meta(5, 1.0, 2.0, 1.0, 0.5, 40);
  SyntheticOptions opt;
  opt.drift = 0.3;
  const ProblemStream a = gen_synthetic(meta, 17, SyntheticMode::kQuadratic, opt);
  const ProblemStream b = gen_synthetic(meta, 17, SyntheticMode::kQuadratic, opt);
  for (long t = 0; t < a.size(); ++t) {
    const auto& la = std::get<QuadraticLoss>(a.rounds()[t].loss());
    const auto& lb = std::get<QuadraticLoss>(b.rounds()[t].loss());
    EXPECT_EQ(la.c, lb.c);
    EXPECT_EQ(la.center, lb.center);
    EXPECT_EQ(a.rounds()[t].constraint().p, b.rounds()[t].constraint().p);
    EXPECT_EQ(a.rounds()[t].constraint().b, b.rounds()[t].constraint().b);
  }
  const ProblemStream c = gen_synthetic(meta, 18, SyntheticMode::kQuadratic, opt);
  EXPECT_NE(a.rounds()[0].constraint().p, c.rounds()[0].constraint().p);
}

TEST(SyntheticTest, QuadraticIsStronglyConvex) {
  const double alpha = 0.7;
  const ProblemMeta meta = testing::ball_meta(4, 1.0, 2.0, 1.0, alpha, 10);
  const ProblemStream s = gen_synthetic(meta, 1, SyntheticMode::kQuadratic);
  std::mt19937_64 rng(2);
  for (const RoundFunctions& r : s.rounds()) {
    for (int i = 0; i < 100; ++i) {
      const Vector x = sample_member(meta.set, rng);
      const Vector y = sample_member(meta.set, rng);
      const double lower = r.loss_value(x) + r.loss_subgrad(x).dot(y - x) +
                           0.5 * alpha * (y - x).squaredNorm();
      EXPECT_GE(r.loss_value(y), lower - 1e-9);
    }
  }
}

TEST(SyntheticTest, GradientsRespectLipschitzBound) {
  const ProblemMeta meta = testing::ball_meta(6, 0.5, 2.0, 1.0, 1.0, 50);
  const ProblemStream s = gen_synthetic(meta, 3, SyntheticMode::kQuadratic);
  std::mt19937_64 rng(4);
  for (const RoundFunctions& r : s.rounds()) {
    const Vector x = sample_member(meta.set, rng);
    EXPECT_LE(r.loss_subgrad(x).norm(), s.meta().lipschitz_G + 1e-12);
    EXPECT_LE(r.constraint_subgrad(x).norm(), s.meta().lipschitz_G + 1e-12);
    EXPECT_LE(std::abs(r.loss_value(x)), s.meta().value_bound_M + 1e-12);
  }
}

TEST(SyntheticTest, RejectsInfeasibleStrongConvexity) {
  // alpha * D = 4 > G = 1
  const ProblemMeta meta = testing::ball_meta(2, 1.0, 1.0, 1.0, 2.0, 10);
  EXPECT_THROW(gen_synthetic(meta, 1, SyntheticMode::kQuadratic), std::invalid_argument);
}

TEST(CompletionTest, ZeroResidualAndSingleObservation) {
  const RoundFunctions agree(CompletionLoss{2, 2, {{0, 1, 3.0}}}, AffineConstraint{Vector::Zero(4), 0.0});
  Vector x = Vector::Zero(4);
  x[2] = 3.0;  // column-major (0, 1)
  EXPECT_EQ(agree.loss_value(x), 0.0);

  const RoundFunctions off(CompletionLoss{2, 2, {{1, 0, -2.0}}}, AffineConstraint{Vector::Zero(4), 0.0});
  EXPECT_EQ(off.loss_value(Vector::Zero(4)), 2.0);
  const Vector g = off.loss_subgrad(Vector::Zero(4));
  EXPECT_EQ(g, (Vector{{0.0, 2.0, 0.0, 0.0}}));
}

TEST(CompletionTest, ConstraintEntriesInUnitRange) {
  CompletionOptions opt;
  opt.rows = 8;
  opt.cols = 5;
  opt.rank = 2;
  opt.horizon_T = 10000 / 40 + 1;
  const ProblemStream s = gen_matrix_completion(opt, 6);
  long n = 0;
  for (const RoundFunctions& r : s.rounds()) {
    const Vector& p = r.constraint().p;
    EXPECT_LE(p.cwiseAbs().maxCoeff(), 1.0);
    n += p.size();
  }
  EXPECT_GE(n, 10000);
}

TEST(CompletionTest, FeasibleModeHintSatisfiesEveryConstraint) {
  CompletionOptions opt;
  opt.rows = 6;
  opt.cols = 6;
  opt.rank = 2;
  opt.horizon_T = 300;
  const ProblemStream s = gen_matrix_completion(opt, 3);
  ASSERT_TRUE(s.comparator_hint());
  EXPECT_TRUE(contains(s.meta().set, *s.comparator_hint(), 1e-9));
  for (const RoundFunctions& r : s.rounds()) EXPECT_LE(r.constraint_value(*s.comparator_hint()), 0.0);
}

TEST(CompletionTest, RejectsTooManyObservations) {
  CompletionOptions opt;
  opt.rows = 2;
  opt.cols = 2;
  opt.rank = 1;
  opt.obs_per_round = 5;
  EXPECT_THROW(gen_matrix_completion(opt, 1), std::invalid_argument);
}

TEST(RatingsTest, ParsesOneBasedIds) {
  const fs::path p = write_temp("one.tsv", "1\t5\t3\t874965758\n");
  const std::vector<Rating> r = parse_ratings(p);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].row, 0);
  EXPECT_EQ(r[0].col, 4);
  EXPECT_EQ(r[0].value, 3.0);
}

TEST(RatingsTest, MalformedLineNamesLineNumber) {
  const fs::path p = write_temp("bad.tsv", "1\t2\t3\t4\n1\tx\t3\t4\n");
  try {
    parse_ratings(p);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(RatingsTest, EmptyFileRejected) {
  MovieLensOptions opt;
  EXPECT_THROW(load_movielens(write_temp("empty.tsv", ""), opt, 1), std::invalid_argument);
}

TEST(RatingsTest, BatchesInFileOrder) {
  std::string body;
  for (int i = 0; i < 10; ++i) body += "1\t" + std::to_string(i + 1) + "\t" + std::to_string(i) + "\t0\n";
  MovieLensOptions opt;
  opt.horizon_T = 2;
  opt.obs_per_round = 5;
  opt.trace_bound = 10.0;
  const ProblemStream s = load_movielens(write_temp("ten.tsv", body), opt, 1);
  ASSERT_EQ(s.size(), 2);
  for (int t = 0; t < 2; ++t) {
    const auto& obs = std::get<CompletionLoss>(s.rounds()[t].loss()).observations;
    ASSERT_EQ(obs.size(), 5u);
    for (int k = 0; k < 5; ++k) {
      EXPECT_EQ(obs[k].col, 5 * t + k);
      EXPECT_EQ(obs[k].value, 5.0 * t + k);
    }
  }
  opt.horizon_T = 3;
  EXPECT_THROW(load_movielens(write_temp("ten.tsv", body), opt, 1), std::invalid_argument);
}

TEST(AggregateTest, MatchesSumOfRounds) {
  const ProblemMeta meta = testing::ball_meta(3, 1.0, 3.0, 1.0, 1.0, 20);
  const ProblemStream s = gen_synthetic(meta, 8, SyntheticMode::kQuadratic);
  const AggregateLoss agg = aggregate(s.rounds());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vector x = sample_member(meta.set, rng);
    double v = 0.0;
    Vector g = Vector::Zero(3);
    for (const RoundFunctions& r : s.rounds()) {
      v += r.loss_value(x);
      g += r.loss_subgrad(x);
    }
    EXPECT_NEAR(agg.value(x), v, 1e-10);
    EXPECT_LT((agg.gradient(x) - g).norm(), 1e-10);
  }
}

TEST(StreamTest, CursorConsumesExactlyT) {
  ProblemStream s = gen_synthetic(synthetic_meta(2, 0.0, 5), 1, SyntheticMode::kLinear);
  int n = 0;
  while (!s.done()) {
    s.next();
    ++n;
  }
  EXPECT_EQ(n, 5);
  EXPECT_THROW(s.next(), std::out_of_range);
  s.rewind();
  EXPECT_FALSE(s.done());
}

}  // namespace
}  // namespace cocofw
