#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

#include "cocofw/bandit_algorithms.hpp"
#include "support/oracles.hpp"

namespace cocofw {
namespace {

using testing::ball_meta;
using testing::linear_round;
using testing::random_direction;

TEST(FwGapTest, Examples) {
  const Vector y{{0.1, 0.2}};
  EXPECT_EQ(fw_gap(Vector{{3.0, 1.0}}, y, y), 0.0);
  const FeasibleSet ball = FeasibleSet::L2Ball(2, 1.0);
  const Vector g{{1.0, 0.0}};
  const Vector v = lmo(ball, g);
  EXPECT_EQ(v, (Vector{{-1.0, 0.0}}));
  EXPECT_EQ(fw_gap(g, Vector::Zero(2), v), 1.0);
}

TEST(FwGapTest, NonNegativeAtLmo) {
  std::mt19937_64 rng(1);
  const FeasibleSet box = FeasibleSet::Box(4, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector g = random_direction(4, rng);
    const Vector y = sample_member(box, rng);
    EXPECT_GE(fw_gap(g, y, lmo(box, g)), -1e-9);
  }
}

TEST(BfwDefaultsTest, TheoremValues) {
  const ProblemMeta meta = ball_meta(4, 1.0, 1.0, 2.0, 0.0, 10000);
  const BfwParams p = bfw_defaults(meta);
  const double c = 0.5;
  const double D = 2.0;
  const double d = 4.0;
  const double M = 2.0;
  EXPECT_EQ(p.c, c);
  EXPECT_EQ(p.surrogate.gamma, 1.0);
  EXPECT_EQ(p.block_k, 100);
  EXPECT_DOUBLE_EQ(p.epsilon, 4.0 * D * D / 100.0);
  EXPECT_DOUBLE_EQ(p.delta, c / 10.0);
  const double c2 = 16.0 * (c * D / 1.0 + 3 * c + 1 + 2 * c * D / (d * M) + d * M * D / c);
  EXPECT_DOUBLE_EQ(p.surrogate.beta, 1.0 / c2);
  EXPECT_EQ(p.phi.kind, LyapunovKind::kExp);
  EXPECT_DOUBLE_EQ(p.phi.lambda, 0.5 / 1000.0);
}

TEST(BfwTvcTest, RejectsDeltaAtInnerRadius) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.0, 100);
  BfwParams p = bfw_defaults(meta);
  p.delta = 1.0;
  EXPECT_THROW(BfwTvc(meta, p, 1), std::invalid_argument);
}

TEST(BfwTvcTest, ZeroGradientBlockKeepsPoint) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.0, 100);
  BfwTvc bfw(meta, bfw_defaults(meta), 1);
  bfw.block_end(Vector::Zero(2), 0.1);
  EXPECT_EQ(bfw.last_inner_iters(), 0);
  EXPECT_EQ(bfw.last_gap(), 0.0);
  EXPECT_EQ(bfw.y_hat().norm(), 0.0);
  EXPECT_EQ(bfw.block(), 2);
}

TEST(BfwTvcTest, BlockEndPostconditions) {
  const long T = 400;
  const ProblemMeta meta = ball_meta(3, 1.0, 1.0, 1.0, 0.0, T);
  BfwParams p = bfw_defaults(meta);
  p.epsilon = 1e-3;
  BfwTvc bfw(meta, p, 2);
  std::mt19937_64 rng(3);
  for (int m = 0; m < 20; ++m) {
    const double bound = 0.5 * (m + 1);
    bfw.block_end(50.0 * random_direction(3, rng), bound);
    EXPECT_GE(bfw.g_tilde(), bound);
    EXPECT_EQ(bfw.g_tilde(), std::ldexp(1.0, bfw.epoch() - 1));
    EXPECT_LE(bfw.last_gap(), p.epsilon);
    EXPECT_TRUE(contains(bfw.shrunk(), bfw.y_hat(), 1e-9));
    // The exit test, recomputed independently.
    const Vector grad = bfw.eta() * bfw.grad_sum() + 2.0 * (bfw.y_hat() - bfw.anchor());
    EXPECT_LE(fw_gap(grad, bfw.y_hat(), lmo_shrunk(bfw.shrunk(), grad)), p.epsilon + 1e-12);
  }
}

TEST(BfwTvcTest, DoublingResetsAccumulator) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.0, 100);
  BfwTvc bfw(meta, bfw_defaults(meta), 4);
  bfw.block_end(Vector{{1.0, 0.0}}, 0.5);
  const Vector y1 = bfw.y_hat();
  bfw.block_end(Vector{{0.0, 2.0}}, 5.0);
  EXPECT_EQ(bfw.g_tilde(), 8.0);
  EXPECT_EQ(bfw.epoch(), 4);
  EXPECT_EQ(bfw.anchor(), y1);
  EXPECT_EQ(bfw.grad_sum(), (Vector{{0.0, 2.0}}));
}

TEST(BfwTvcTest, InnerLoopCapThrows) {
  // Box whose constrained minimiser sits mid-edge while the unconstrained one
  // is just outside: iterates approach the edge from inside, zigzag between
  // two corners and the gap decays only like 1/k.
  ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.0, 100);
  meta.set = FeasibleSet::Box(2, 1.0);
  BfwParams p = bfw_defaults(meta);
  p.epsilon = 1e-300;
  BfwTvc bfw(meta, p, 1);
  EXPECT_THROW(bfw.block_end(Vector{{112.0, 10.0}}, 0.5), std::runtime_error);
}

std::vector<Vector> run_bandit(Learner& learner, const ProblemMeta& meta, std::uint64_t seed,
                               std::vector<RoundDiag>* diags = nullptr) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> xs;
  for (long t = 1; t <= meta.horizon_T; ++t) {
    const Vector c = random_direction(meta.set.dimension(), rng).normalized();
    const Vector p = random_direction(meta.set.dimension(), rng).normalized();
    const RoundDiag d = learner.step(linear_round(c, p, 0.1));
    xs.push_back(d.x);
    if (diags) diags->push_back(d);
  }
  return xs;
}

TEST(BfwTvcTest, FeasibleBlockedAndDeterministic) {
  const ProblemMeta meta = ball_meta(3, 1.0, 1.0, 1.0, 0.0, 1000);
  const BfwParams p = bfw_defaults(meta);
  BfwTvc a(meta, p, 7);
  std::vector<RoundDiag> diags;
  const std::vector<Vector> xs = run_bandit(a, meta, 1, &diags);
  BfwTvc b(meta, p, 7);
  EXPECT_EQ(xs, run_bandit(b, meta, 1));
  long block_ends = 0;
  double block_max = 0.0;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    EXPECT_TRUE(contains(meta.set, diags[i].x, 1e-9));
    block_max = std::max(block_max, surrogate_grad_bound(p.surrogate, p.phi, 1.0, diags[i].q));
    if (diags[i].doubling_checked) {
      ++block_ends;
      EXPECT_GE(diags[i].g_tilde, block_max);
      block_max = 0.0;
    }
  }
  EXPECT_EQ(block_ends, (1000 + p.block_k - 1) / p.block_k);
  EXPECT_EQ(a.last_block_terms(), 1000 - (block_ends - 1) * p.block_k);
}

TEST(ScbfwDefaultsTest, Variants) {
  const ProblemMeta meta = ball_meta(3, 1.0, 2.0, 1.0, 1.0, 1000);
  const ScbfwParams app = scbfw_defaults(meta);
  const double c = 0.5;
  const double D = 2.0;
  EXPECT_EQ(app.surrogate.beta, 1.0);
  const double big_c = 8 + 3 * c + c * D + 12 * D;
  EXPECT_NEAR(app.surrogate.gamma, 16.0 * (8.0 * std::log(10.0) + big_c) * 4.0 * 100.0, 1e-6);
  EXPECT_EQ(app.block_k, 100);
  EXPECT_EQ(app.inner_l, 100);
  EXPECT_NEAR(app.delta, 0.05, 1e-15);
  EXPECT_EQ(app.phi.kind, LyapunovKind::kQuad);
  const ScbfwParams thm = scbfw_defaults(meta, {}, BetaVariant::kTheorem);
  EXPECT_NEAR(thm.surrogate.beta, 1.0 / (2.0 * D * 100.0), 1e-15);
  EXPECT_DOUBLE_EQ(thm.surrogate.gamma, 2.0 / (2.0 + D));
}

TEST(ScbfwTvcTest, RejectsGeneralConvex) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.0, 100);
  EXPECT_THROW(ScbfwTvc(meta, scbfw_defaults(meta), 1), std::invalid_argument);
}

TEST(ScbfwTvcTest, CentredQuadraticStaysAtOrigin) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.5, 100);
  ScbfwTvc s(meta, scbfw_defaults(meta), 1);
  s.block_end(Vector::Zero(2), 10);
  EXPECT_EQ(s.y_hat().norm(), 0.0);
  EXPECT_GT(s.c3(), 0.0);
}

TEST(ScbfwTvcTest, NoInnerIterationsKeepsPoint) {
  const ProblemMeta meta = ball_meta(2, 1.0, 1.0, 1.0, 0.5, 100);
  ScbfwParams p = scbfw_defaults(meta);
  p.inner_l = 0;
  ScbfwTvc s(meta, p, 1);
  s.block_end(Vector{{5.0, 1.0}}, 10);
  EXPECT_EQ(s.y_hat().norm(), 0.0);
}

TEST(ScbfwTvcTest, InnerLoopDecreasesObjective) {
  const ProblemMeta meta = ball_meta(3, 1.0, 1.0, 1.0, 0.5, 100);
  ScbfwParams p = scbfw_defaults(meta);
  p.surrogate.gamma = 1.0;
  ScbfwTvc s(meta, p, 1);
  std::mt19937_64 rng(6);
  for (long m = 1; m <= 30; ++m) {
    const Vector before = s.y_hat();
    s.block_end(random_direction(3, rng), 3 * m);
    EXPECT_LE(s.objective(s.y_hat()), s.objective(before) + 1e-12);
    EXPECT_TRUE(contains(s.shrunk(), s.y_hat(), 1e-9));
  }
}

TEST(ScbfwTvcTest, FeasibleAndDeterministic) {
  const ProblemMeta meta = ball_meta(3, 1.0, 1.0, 1.0, 0.5, 1000);
  const ScbfwParams p = scbfw_defaults(meta);
  ScbfwTvc a(meta, p, 3);
  ScbfwTvc b(meta, p, 3);
  const std::vector<Vector> xs = run_bandit(a, meta, 2);
  for (const Vector& x : xs) EXPECT_TRUE(contains(meta.set, x, 1e-9));
  EXPECT_EQ(xs, run_bandit(b, meta, 2));
  ScbfwTvc c(meta, p, 4);
  EXPECT_NE(xs, run_bandit(c, meta, 2));
}

}  // namespace
}  // namespace cocofw
