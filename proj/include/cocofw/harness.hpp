#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cocofw/config.hpp"
#include "cocofw/learner.hpp"

namespace cocofw {

struct ComparatorResult {
  Vector x_star;
  double max_g = 0.0;  // max_t g_t(x_star)
  bool hinted = false;
  bool feasible() const { return max_g <= 0.0; }
};

// The stream's hint if present, else `iters` Frank-Wolfe steps on sum_t f_t.
ComparatorResult solve_comparator(const ProblemStream& stream, long iters);

struct RoundRow {
  long t = 0;
  double f_value = 0.0;
  double g_value = 0.0;
  double cum_loss = 0.0;
  double ccv = 0.0;
  double regret = 0.0;
  double surrogate_regret = 0.0;
  // surrogate_regret - gamma*beta*regret - Phi(beta*Q_t), summed term-wise.
  double lemma3_slack = 0.0;
  int epoch = 1;
  double g_tilde = 0.0;
  long block = 0;
  double sigma = 0.0;
  bool clamped = false;
};

// Invariant categories tracked per run.
inline constexpr const char* kCheckFeasibility = "feasibility";
inline constexpr const char* kCheckCcvMonotone = "ccv_monotone";
inline constexpr const char* kCheckDrift = "drift";
inline constexpr const char* kCheckLemma3 = "lemma3";
inline constexpr const char* kCheckGradBound = "grad_bound";
inline constexpr const char* kCheckDoubling = "doubling";
inline constexpr const char* kCheckEpochCount = "epoch_count";

struct RunRecord {
  std::string algo;
  std::string problem;
  std::uint64_t seed = 0;
  long horizon = 0;
  bool regret_available = false;
  double comparator_max_g = 0.0;
  nlohmann::json params;
  std::vector<RoundRow> rows;
  std::map<std::string, long> checks;      // checks performed per category
  std::map<std::string, long> violations;  // failures per category
  std::vector<std::string> messages;       // first few failures, with context
  std::string error;                       // non-empty if the run aborted
  long saturated_rounds = 0;
  long clamped_rounds = 0;

  long violation_count() const;
  bool ok() const { return error.empty() && violation_count() == 0; }
};

// Feeds every round of the stream to the learner and fills in metrics. With
// assertions on, every per-round invariant is checked and tallied.
RunRecord run_learner(Learner& learner, const ProblemStream& stream,
                      const ComparatorResult& comparator, bool assertions);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln T, ln metric)
};

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

ProblemStream make_problem(const ExperimentConfig& config, long T, std::uint64_t seed);

struct LearnerBundle {
  std::unique_ptr<Learner> learner;
  nlohmann::json params;  // every resolved hyper-parameter
};

LearnerBundle make_learner(const ExperimentConfig& config, Algo algo, const ProblemMeta& meta,
                           std::uint64_t seed);

RunRecord run_single(const ExperimentConfig& config, Algo algo, long T, std::uint64_t seed,
                     long comparator_iters, bool keep_rows = true);

struct MeanRow {
  std::string algo;
  long horizon = 0;
  int seeds = 0;
  double cum_loss = 0.0;
  double ccv = 0.0;
  std::optional<double> regret;  // only when every seed has a feasible comparator
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // sorted by (algo, problem, seed, T)
  std::vector<MeanRow> means;
  nlohmann::json summary;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Number of worker threads: hardware concurrency capped by COCOFW_THREADS.
int worker_threads(std::size_t jobs);

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

// Aggregates per-(algo, T) means over seeds and fits log-log slopes.
std::vector<MeanRow> seed_means(const std::vector<RunRecord>& runs);
nlohmann::json slope_summary(const std::vector<MeanRow>& means);

inline constexpr const char* kCsvHeader =
    "t,algo,problem,seed,f_value,g_value,cum_loss,ccv,regret,surrogate_regret,epoch,g_tilde,"
    "block,sigma,clamped";

void write_csv(std::ostream& out, const std::vector<const RunRecord*>& runs);

// trace_T<T>.csv per horizon plus summary.json. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                 const std::filesystem::path& dir);

}  // namespace cocofw
