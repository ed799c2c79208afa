#include <cmath>
#include <string>

#include "gtest/gtest.h"

#include "cocofw/harness.hpp"

namespace cocofw {
namespace {

using nlohmann::json;

std::vector<std::string> errors_of(const json& doc) {
  try {
    parse_config({doc});
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& key) {
  for (const std::string& e : errors) {
    if (e.rfind(key, 0) == 0) return true;
  }
  return false;
}

TEST(ConfigTest, OfwDefaultsResolved) {
  const ExperimentConfig cfg =
      parse_config({json{{"algo", "ofw-tvc"}, {"problem", "synthetic-linear"}, {"t", 1024}, {"seeds", 3}}});
  EXPECT_EQ(cfg.seeds, 3);
  EXPECT_EQ(cfg.t_grid, std::vector<long>{1024});
  const ProblemStream s = make_problem(cfg, 1024, 1);
  const LearnerBundle b = make_learner(cfg, Algo::kOfw, s.meta(), 1);
  // G = 1, D = 2
  EXPECT_DOUBLE_EQ(b.params["beta"].get<double>(), 1.0 / 128.0);
  EXPECT_EQ(b.params["gamma"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(b.params["lambda"].get<double>(), 0.5 * std::pow(1024.0, -0.75));
}

TEST(ConfigTest, StronglyConvexNeedsAlpha) {
  const auto errs = errors_of({{"algo", "scofw-tvc"}, {"problem", "synthetic-quadratic"}, {"t", 64}});
  EXPECT_TRUE(mentions(errs, "alpha_f")) << errs.size();
}

TEST(ConfigTest, BanditDeltaMustBeBelowInnerRadius) {
  const auto errs =
      errors_of({{"algo", "bfw-tvc"}, {"problem", "synthetic-linear"}, {"t", 64}, {"delta", 2.0}, {"radius", 1.0}});
  EXPECT_TRUE(mentions(errs, "delta"));
}

TEST(ConfigTest, CollectsEveryProblem) {
  const auto errs = errors_of({{"algo", "nope"}, {"t", json::array()}, {"seeds", 0}, {"bogus", 1}});
  EXPECT_TRUE(mentions(errs, "algo"));
  EXPECT_TRUE(mentions(errs, "problem"));
  EXPECT_TRUE(mentions(errs, "seeds"));
  EXPECT_TRUE(mentions(errs, "unknown key 'bogus'"));
}

TEST(ConfigTest, LaterLayersOverride) {
  const json file{{"algo", "ofw-tvc"}, {"problem", "synthetic-linear"}, {"t", {64, 32, 64}}, {"seeds", 4}};
  const json flags{{"seeds", 2}, {"radius", 0.5}};
  const ExperimentConfig cfg = parse_config({file, flags});
  EXPECT_EQ(cfg.seeds, 2);
  EXPECT_EQ(cfg.problem_config.radius, 0.5);
  EXPECT_EQ(cfg.t_grid, (std::vector<long>{32, 64}));
}

TEST(ConfigTest, RoundTripsThroughJson) {
  const ExperimentConfig cfg = parse_config({json{{"algo", {"bfw-tvc", "scbfw-tvc"}},
                                                  {"problem", "synthetic-quadratic"},
                                                  {"alpha_f", 0.25},
                                                  {"t", {100, 200}},
                                                  {"c", 0.1}}});
  const ExperimentConfig again = parse_config({to_json(cfg)});
  EXPECT_EQ(to_json(again), to_json(cfg));
}

TEST(ConfigTest, MatrixOptions) {
  EXPECT_TRUE(mentions(errors_of({{"algo", "ofw-tvc"}, {"problem", "matrix-completion"}, {"t", 10}, {"rank", 40}}),
                       "rank"));
  EXPECT_TRUE(mentions(errors_of({{"algo", "ofw-tvc"}, {"problem", "synthetic-linear"}, {"t", 10},
                                  {"offset_mode", "paper"}}),
                       "offset_mode"));
  EXPECT_NO_THROW(parse_config({json{{"algo", "ofw-tvc"}, {"problem", "matrix-completion"}, {"t", 10},
                                     {"rows", 4}, {"cols", 5}, {"rank", 2}, {"offset_mode", "paper"}}}));
}

TEST(ConfigTest, EnumNamesRoundTrip) {
  for (Algo a : {Algo::kOfw, Algo::kScofw, Algo::kBfw, Algo::kScbfw}) EXPECT_EQ(parse_algo(to_string(a)), a);
  for (ProblemKind p : {ProblemKind::kSyntheticLinear, ProblemKind::kSyntheticQuadratic,
                        ProblemKind::kMatrixCompletion, ProblemKind::kMovieLens}) {
    EXPECT_EQ(parse_problem(to_string(p)), p);
  }
  EXPECT_FALSE(parse_algo("fw"));
}

}  // namespace
}  // namespace cocofw
