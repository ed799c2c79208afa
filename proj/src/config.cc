#include "cocofw/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace cocofw {
namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& doc, std::vector<std::string>& errors) : doc_(doc), errors_(errors) {}

  bool has(const char* key) const { return doc_.contains(key); }

  template <class T>
  std::optional<T> number(const char* key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_.at(key);
    if (std::is_integral_v<T> ? !v.is_number_integer() : !v.is_number()) {
      errors_.push_back(std::string(key) + ": expected " +
                        (std::is_integral_v<T> ? "an integer" : "a number") + ", got " + v.dump());
      return std::nullopt;
    }
    const T out = v.get<T>();
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(out)) {
        errors_.push_back(std::string(key) + ": must be finite");
        return std::nullopt;
      }
    }
    return out;
  }

  std::optional<std::string> string(const char* key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_.at(key);
    if (!v.is_string()) {
      errors_.push_back(std::string(key) + ": expected a string, got " + v.dump());
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<bool> boolean(const char* key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_.at(key);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string() && (v == "on" || v == "off")) return v == "on";
    errors_.push_back(std::string(key) + ": expected true/false or on/off, got " + v.dump());
    return std::nullopt;
  }

  // A scalar or an array of scalars.
  template <class T, class F>
  std::vector<T> list(const char* key, F&& item) {
    std::vector<T> out;
    if (!has(key)) return out;
    const json& v = doc_.at(key);
    if (v.is_array()) {
      for (const json& e : v) {
        if (auto x = item(e)) out.push_back(*x);
      }
    } else if (auto x = item(v)) {
      out.push_back(*x);
    }
    return out;
  }

 private:
  const json& doc_;
  std::vector<std::string>& errors_;
};

void require_positive(std::vector<std::string>& errors, const char* key,
                      const std::optional<double>& v) {
  if (v && !(*v > 0.0)) errors.push_back(std::string(key) + ": must be > 0, got " + std::to_string(*v));
}

std::optional<FeasibleSet> synthetic_set(const ProblemConfig& p) {
  try {
    switch (p.set) {
      case SetKind::kL2Ball:
        return FeasibleSet::L2Ball(p.dim, p.radius);
      case SetKind::kBox:
        return FeasibleSet::Box(p.dim, p.radius);
      case SetKind::kSimplex:
        return FeasibleSet::Simplex(p.dim, p.radius);
      case SetKind::kTraceNormBall:
        return std::nullopt;
    }
  } catch (const std::invalid_argument&) {
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::kOfw:
      return "ofw-tvc";
    case Algo::kScofw:
      return "scofw-tvc";
    case Algo::kBfw:
      return "bfw-tvc";
    case Algo::kScbfw:
      return "scbfw-tvc";
  }
  return "unknown";
}

std::string to_string(ProblemKind problem) {
  switch (problem) {
    case ProblemKind::kSyntheticLinear:
      return "synthetic-linear";
    case ProblemKind::kSyntheticQuadratic:
      return "synthetic-quadratic";
    case ProblemKind::kMatrixCompletion:
      return "matrix-completion";
    case ProblemKind::kMovieLens:
      return "movielens-file";
  }
  return "unknown";
}

std::optional<Algo> parse_algo(const std::string& name) {
  for (Algo a : {Algo::kOfw, Algo::kScofw, Algo::kBfw, Algo::kScbfw}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<ProblemKind> parse_problem(const std::string& name) {
  for (ProblemKind p : {ProblemKind::kSyntheticLinear, ProblemKind::kSyntheticQuadratic,
                        ProblemKind::kMatrixCompletion, ProblemKind::kMovieLens}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

bool is_bandit(Algo algo) { return algo == Algo::kBfw || algo == Algo::kScbfw; }
bool is_strongly_convex(Algo algo) { return algo == Algo::kScofw || algo == Algo::kScbfw; }

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) out += "\n  " + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration:" + join(errors)), errors_(std::move(errors)) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "algo",      "problem",     "t",          "seeds",         "out",          "force",
      "assert",    "beta_variant", "comparator_iters", "beta",   "gamma",        "lambda",
      "c",         "block_k",     "inner_l",    "epsilon",       "delta",        "alpha_f",
      "offset_mode", "set",       "dim",        "radius",        "lipschitz",    "drift",
      "slack_max", "rows",        "cols",       "rank",          "obs_per_round", "trace_bound",
      "inner_radius", "data"};
  return keys;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config file " + path.string() + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::vector<nlohmann::json>& layers) {
  std::vector<std::string> errors;
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  json merged = json::object();
  for (const json& layer : layers) {
    if (!layer.is_object()) {
      errors.push_back("config document must be a JSON object");
      continue;
    }
    for (const auto& [key, value] : layer.items()) {
      if (!known.count(key)) {
        errors.push_back("unknown key '" + key + "'");
        continue;
      }
      merged[key] = value;
    }
  }

  Reader r(merged, errors);
  ExperimentConfig cfg;

  cfg.algos = r.list<Algo>("algo", [&](const json& v) -> std::optional<Algo> {
    if (v.is_string()) {
      if (auto a = parse_algo(v.get<std::string>())) return a;
    }
    errors.push_back("algo: unknown algorithm " + v.dump() +
                     " (expected ofw-tvc, scofw-tvc, bfw-tvc or scbfw-tvc)");
    return std::nullopt;
  });
  if (!r.has("algo")) errors.push_back("algo: required");

  if (auto p = r.string("problem")) {
    if (auto kind = parse_problem(*p)) {
      cfg.problem = *kind;
    } else {
      errors.push_back("problem: unknown problem '" + *p +
                       "' (expected synthetic-linear, synthetic-quadratic, matrix-completion or "
                       "movielens-file)");
    }
  } else if (!r.has("problem")) {
    errors.push_back("problem: required");
  }

  cfg.t_grid = r.list<long>("t", [&](const json& v) -> std::optional<long> {
    if (v.is_number_integer() && v.get<long>() >= 1) return v.get<long>();
    errors.push_back("t: horizons must be positive integers, got " + v.dump());
    return std::nullopt;
  });
  if (!r.has("t")) errors.push_back("t: at least one horizon is required");
  std::sort(cfg.t_grid.begin(), cfg.t_grid.end());
  cfg.t_grid.erase(std::unique(cfg.t_grid.begin(), cfg.t_grid.end()), cfg.t_grid.end());

  if (auto s = r.number<long>("seeds")) {
    if (*s < 1) errors.push_back("seeds: must be >= 1");
    cfg.seeds = static_cast<int>(*s);
  }
  cfg.out_dir = r.string("out").value_or("cocofw-out");
  cfg.force = r.boolean("force").value_or(false);
  cfg.assertions = r.boolean("assert").value_or(true);
  if (auto v = r.string("beta_variant")) {
    if (*v == "appendix") {
      cfg.beta_variant = BetaVariant::kAppendix;
    } else if (*v == "theorem") {
      cfg.beta_variant = BetaVariant::kTheorem;
    } else {
      errors.push_back("beta_variant: expected 'appendix' or 'theorem', got '" + *v + "'");
    }
  }
  if (auto v = r.number<long>("comparator_iters")) {
    if (*v < 1) errors.push_back("comparator_iters: must be >= 1");
    cfg.comparator_iters = *v;
  }

  Overrides& o = cfg.overrides;
  o.beta = r.number<double>("beta");
  o.gamma = r.number<double>("gamma");
  o.lambda = r.number<double>("lambda");
  o.c = r.number<double>("c");
  o.epsilon = r.number<double>("epsilon");
  o.delta = r.number<double>("delta");
  o.block_k = r.number<long>("block_k");
  o.inner_l = r.number<long>("inner_l");
  require_positive(errors, "beta", o.beta);
  require_positive(errors, "gamma", o.gamma);
  require_positive(errors, "lambda", o.lambda);
  require_positive(errors, "c", o.c);
  require_positive(errors, "epsilon", o.epsilon);
  require_positive(errors, "delta", o.delta);
  if (o.block_k && *o.block_k < 1) errors.push_back("block_k: must be >= 1");
  if (o.block_k && !cfg.t_grid.empty() && *o.block_k > cfg.t_grid.front()) {
    errors.push_back("block_k: exceeds the smallest horizon " + std::to_string(cfg.t_grid.front()));
  }
  if (o.inner_l && *o.inner_l < 0) errors.push_back("inner_l: must be >= 0");

  ProblemConfig& p = cfg.problem_config;
  if (auto s = r.string("set")) {
    if (*s == "l2-ball") {
      p.set = SetKind::kL2Ball;
    } else if (*s == "box") {
      p.set = SetKind::kBox;
    } else if (*s == "simplex") {
      p.set = SetKind::kSimplex;
    } else {
      errors.push_back("set: expected l2-ball, box or simplex, got '" + *s + "'");
    }
  }
  if (auto v = r.number<long>("dim")) p.dim = static_cast<int>(*v);
  if (auto v = r.number<double>("radius")) p.radius = *v;
  if (auto v = r.number<double>("lipschitz")) p.lipschitz = *v;
  p.alpha_f = r.number<double>("alpha_f");
  if (auto v = r.number<double>("drift")) p.drift = *v;
  if (auto v = r.number<double>("slack_max")) p.slack_max = *v;
  if (auto v = r.string("offset_mode")) {
    if (*v == "paper") {
      p.offset_mode = OffsetMode::kPaper;
    } else if (*v == "feasible") {
      p.offset_mode = OffsetMode::kFeasible;
    } else {
      errors.push_back("offset_mode: expected 'paper' or 'feasible', got '" + *v + "'");
    }
  }
  if (auto v = r.number<long>("rows")) p.rows = static_cast<int>(*v);
  if (auto v = r.number<long>("cols")) p.cols = static_cast<int>(*v);
  if (auto v = r.number<long>("rank")) p.rank = static_cast<int>(*v);
  if (auto v = r.number<long>("obs_per_round")) p.obs_per_round = static_cast<int>(*v);
  p.trace_bound = r.number<double>("trace_bound");
  p.inner_radius = r.number<double>("inner_radius");
  p.data_path = r.string("data").value_or("");

  if (p.dim < 1) errors.push_back("dim: must be >= 1");
  if (!(p.radius > 0.0)) errors.push_back("radius: must be > 0");
  if (!(p.lipschitz > 0.0)) errors.push_back("lipschitz: must be > 0");
  if (p.alpha_f && *p.alpha_f < 0.0) errors.push_back("alpha_f: must be >= 0");
  if (p.drift < 0.0 || p.drift > 1.0) errors.push_back("drift: must lie in [0, 1]");
  if (p.slack_max < 0.0) errors.push_back("slack_max: must be >= 0");
  require_positive(errors, "trace_bound", p.trace_bound);
  require_positive(errors, "inner_radius", p.inner_radius);

  const bool synthetic = cfg.problem == ProblemKind::kSyntheticLinear ||
                         cfg.problem == ProblemKind::kSyntheticQuadratic;
  const bool wants_sc = std::any_of(cfg.algos.begin(), cfg.algos.end(), is_strongly_convex);
  const bool wants_bandit = std::any_of(cfg.algos.begin(), cfg.algos.end(), is_bandit);

  if (synthetic) {
    if (p.offset_mode) errors.push_back("offset_mode: only applies to matrix problems");
    if (p.set == SetKind::kSimplex && p.dim < 2) errors.push_back("dim: simplex needs dim >= 2");
    if (p.set == SetKind::kSimplex && wants_bandit) {
      errors.push_back("set: bandit algorithms need a set with nonempty interior; simplex has none");
    }
    if (cfg.problem == ProblemKind::kSyntheticLinear) {
      if (p.alpha_f && *p.alpha_f > 0.0) {
        errors.push_back("alpha_f: synthetic-linear losses are not strongly convex");
      }
      if (wants_sc) {
        errors.push_back("alpha_f: strongly convex algorithms need alpha_f > 0; use "
                         "synthetic-quadratic");
      }
    } else if (!p.alpha_f || !(*p.alpha_f > 0.0)) {
      errors.push_back("alpha_f: synthetic-quadratic needs alpha_f > 0");
    }
    if (auto set = synthetic_set(p)) {
      if (cfg.problem == ProblemKind::kSyntheticQuadratic && p.alpha_f &&
          *p.alpha_f * set->diameter() > p.lipschitz) {
        errors.push_back("alpha_f: alpha_f * D = " + std::to_string(*p.alpha_f * set->diameter()) +
                         " exceeds lipschitz G = " + std::to_string(p.lipschitz));
      }
      const double r_in = set->inner_radius();
      if (o.delta && wants_bandit && !(*o.delta < r_in)) {
        errors.push_back("delta: must satisfy delta < r (delta = " + std::to_string(*o.delta) +
                         ", r = " + std::to_string(r_in) + ")");
      }
      if (o.c && !o.delta && !cfg.t_grid.empty()) {
        const double t_min = static_cast<double>(cfg.t_grid.front());
        for (Algo a : cfg.algos) {
          if (!is_bandit(a)) continue;
          const double exponent = a == Algo::kBfw ? -0.25 : -1.0 / 3.0;
          if (!(*o.c * std::pow(t_min, exponent) < r_in)) {
            errors.push_back("c: delta = c * T^" + std::string(a == Algo::kBfw ? "(-1/4)" : "(-1/3)") +
                             " must be < r at T = " + std::to_string(cfg.t_grid.front()) + " for " +
                             to_string(a));
          }
        }
      }
    }
  } else {
    if (p.alpha_f) errors.push_back("alpha_f: fixed at 1 for matrix problems");
    if (r.has("set")) errors.push_back("set: matrix problems always use the trace-norm ball");
    if (cfg.problem == ProblemKind::kMatrixCompletion) {
      if (p.rows < 1 || p.rows > 64) errors.push_back("rows: must be in [1, 64]");
      if (p.cols < 1 || p.cols > 64) errors.push_back("cols: must be in [1, 64]");
      if (p.rank < 1 || p.rank > std::min(p.rows, p.cols)) {
        errors.push_back("rank: must be in [1, min(rows, cols)]");
      }
      if (p.obs_per_round < 1 || p.obs_per_round > p.rows * p.cols) {
        errors.push_back("obs_per_round: must be in [1, rows * cols]");
      }
      if (!p.offset_mode) p.offset_mode = OffsetMode::kFeasible;
    } else {
      if (p.data_path.empty()) errors.push_back("data: movielens-file needs a ratings file");
      if (p.obs_per_round < 1) errors.push_back("obs_per_round: must be >= 1");
      if (!p.offset_mode) p.offset_mode = OffsetMode::kPaper;
    }
    if (o.delta && p.inner_radius && wants_bandit && !(*o.delta < *p.inner_radius)) {
      errors.push_back("delta: must satisfy delta < r (delta = " + std::to_string(*o.delta) +
                       ", r = " + std::to_string(*p.inner_radius) + ")");
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json out;
  json algos = json::array();
  for (Algo a : cfg.algos) algos.push_back(to_string(a));
  out["algo"] = algos;
  out["problem"] = to_string(cfg.problem);
  out["t"] = cfg.t_grid;
  out["seeds"] = cfg.seeds;
  out["out"] = cfg.out_dir.string();
  out["assert"] = cfg.assertions;
  out["beta_variant"] = cfg.beta_variant == BetaVariant::kAppendix ? "appendix" : "theorem";
  if (cfg.comparator_iters) out["comparator_iters"] = *cfg.comparator_iters;
  const Overrides& o = cfg.overrides;
  auto put = [&](const char* key, const auto& v) {
    if (v) out[key] = *v;
  };
  put("beta", o.beta);
  put("gamma", o.gamma);
  put("lambda", o.lambda);
  put("c", o.c);
  put("block_k", o.block_k);
  put("inner_l", o.inner_l);
  put("epsilon", o.epsilon);
  put("delta", o.delta);
  const ProblemConfig& p = cfg.problem_config;
  if (cfg.problem == ProblemKind::kSyntheticLinear ||
      cfg.problem == ProblemKind::kSyntheticQuadratic) {
    out["set"] = std::string(to_string(p.set));
    out["dim"] = p.dim;
    out["radius"] = p.radius;
    out["lipschitz"] = p.lipschitz;
    put("alpha_f", p.alpha_f);
    out["drift"] = p.drift;
  } else {
    out["rows"] = p.rows;
    out["cols"] = p.cols;
    out["obs_per_round"] = p.obs_per_round;
    out["offset_mode"] = p.offset_mode == OffsetMode::kPaper ? "paper" : "feasible";
    put("trace_bound", p.trace_bound);
    put("inner_radius", p.inner_radius);
    if (cfg.problem == ProblemKind::kMatrixCompletion) {
      out["rank"] = p.rank;
    } else {
      out["data"] = p.data_path;
    }
  }
  out["slack_max"] = p.slack_max;
  return out;
}

}  // namespace cocofw
