#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cocofw/objectives.hpp"
#include "cocofw/scofw_tvc.hpp"

namespace cocofw {

enum class Algo { kOfw, kScofw, kBfw, kScbfw };
enum class ProblemKind { kSyntheticLinear, kSyntheticQuadratic, kMatrixCompletion, kMovieLens };

std::string to_string(Algo algo);
std::string to_string(ProblemKind problem);
std::optional<Algo> parse_algo(const std::string& name);
std::optional<ProblemKind> parse_problem(const std::string& name);

bool is_bandit(Algo algo);
bool is_strongly_convex(Algo algo);

struct Overrides {
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> c;
  std::optional<long> block_k;
  std::optional<long> inner_l;
  std::optional<double> epsilon;
  std::optional<double> delta;
};

struct ProblemConfig {
  SetKind set = SetKind::kL2Ball;
  int dim = 10;
  double radius = 1.0;
  double lipschitz = 1.0;
  std::optional<double> alpha_f;
  double drift = 0.0;
  double slack_max = 0.1;
  std::optional<OffsetMode> offset_mode;
  int rows = 32;
  int cols = 32;
  int rank = 3;
  int obs_per_round = 1;
  std::optional<double> trace_bound;
  std::optional<double> inner_radius;
  std::string data_path;
};

struct ExperimentConfig {
  std::vector<Algo> algos;
  ProblemKind problem = ProblemKind::kSyntheticLinear;
  std::vector<long> t_grid;
  int seeds = 5;
  std::filesystem::path out_dir;
  bool force = false;
  bool assertions = true;
  BetaVariant beta_variant = BetaVariant::kAppendix;
  std::optional<long> comparator_iters;
  Overrides overrides;
  ProblemConfig problem_config;
};

// Every problem found while building a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Keys accepted in config documents (and produced from command-line flags).
const std::vector<std::string>& config_keys();

// Builds and validates a config from a flat JSON object. Later documents
// override earlier ones key by key. Throws ConfigError listing every problem.
ExperimentConfig parse_config(const std::vector<nlohmann::json>& layers);

nlohmann::json load_json_file(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace cocofw
