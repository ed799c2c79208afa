#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cocofw/config.hpp"
#include "cocofw/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Collects command-line values into a config layer keyed like the JSON file.
class FlagLayer {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flags, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flags, *value, help);
    setters_.push_back([opt, value, key](json& out) {
      if (opt->count() > 0) out[key] = *value;
    });
  }

  void add_flag(CLI::App* app, const std::string& flags, const std::string& key,
                const std::string& help) {
    CLI::Option* opt = app->add_flag(flags, help);
    setters_.push_back([opt, key](json& out) {
      if (opt->count() > 0) out[key] = true;
    });
  }

  json collect() const {
    json out = json::object();
    for (const auto& set : setters_) set(out);
    return out;
  }

 private:
  std::vector<std::function<void(json&)>> setters_;
};

void add_experiment_flags(CLI::App* app, FlagLayer& layer, bool multi_algo) {
  if (multi_algo) {
    layer.add<std::vector<std::string>>(app, "--algo", "algo", "Algorithm (repeatable)");
  } else {
    layer.add<std::string>(app, "--algo", "algo", "ofw-tvc, scofw-tvc, bfw-tvc or scbfw-tvc");
  }
  layer.add<std::string>(app, "--problem", "problem",
                         "synthetic-linear, synthetic-quadratic, matrix-completion, movielens-file");
  layer.add<std::vector<long>>(app, "--t", "t", "Horizon T (repeatable)");
  layer.add<long>(app, "--seeds", "seeds", "Number of seeds (1..n)");
  layer.add<std::string>(app, "--out", "out", "Output directory");
  layer.add_flag(app, "--force", "force", "Overwrite an existing output directory");
  layer.add<std::string>(app, "--assert", "assert", "Per-round invariant checks: on or off");
  layer.add<std::string>(app, "--beta-variant", "beta_variant",
                         "Strongly convex defaults: appendix or theorem");
  layer.add<long>(app, "--comparator-iters", "comparator_iters",
                  "Offline Frank-Wolfe iterations for the comparator (default 10*T_max)");
  layer.add<double>(app, "--beta", "beta", "Override beta");
  layer.add<double>(app, "--gamma", "gamma", "Override gamma");
  layer.add<double>(app, "--lambda", "lambda", "Override the exponential Lyapunov rate");
  layer.add<double>(app, "--c", "c", "Bandit exploration constant c");
  layer.add<long>(app, "--block-k", "block_k", "Bandit block size K");
  layer.add<long>(app, "--inner-l", "inner_l", "Inner iterations L (scbfw-tvc)");
  layer.add<double>(app, "--epsilon", "epsilon", "FW-gap tolerance (bfw-tvc)");
  layer.add<double>(app, "--delta", "delta", "Exploration radius delta");
  layer.add<double>(app, "--alpha-f", "alpha_f", "Strong convexity of the losses");
  layer.add<std::string>(app, "--offset-mode", "offset_mode", "Matrix problems: paper or feasible");
  layer.add<std::string>(app, "--set", "set", "Synthetic set: l2-ball, box or simplex");
  layer.add<long>(app, "--dim", "dim", "Synthetic dimension d");
  layer.add<double>(app, "--radius,--r", "radius", "Synthetic set size (ball radius, box half-width, simplex scale)");
  layer.add<double>(app, "--lipschitz", "lipschitz", "Synthetic Lipschitz constant G");
  layer.add<double>(app, "--drift", "drift", "Synthetic loss drift weight in [0, 1]");
  layer.add<double>(app, "--slack-max", "slack_max", "Upper end of the constraint slack");
  layer.add<long>(app, "--rows", "rows", "Matrix rows m");
  layer.add<long>(app, "--cols", "cols", "Matrix cols n");
  layer.add<long>(app, "--rank", "rank", "Target rank");
  layer.add<long>(app, "--obs-per-round", "obs_per_round", "Observed entries per round");
  layer.add<double>(app, "--trace-bound", "trace_bound", "Trace-norm bound tau");
  layer.add<double>(app, "--inner-radius", "inner_radius", "Trace-norm ball inner radius r");
  layer.add<std::string>(app, "--data", "data", "Ratings file for movielens-file");
}

std::optional<cocofw::ExperimentConfig> build_config(const std::string& config_path,
                                                     const FlagLayer& flags) {
  std::vector<json> layers;
  try {
    if (!config_path.empty()) layers.push_back(cocofw::load_json_file(config_path));
    layers.push_back(flags.collect());
    return cocofw::parse_config(layers);
  } catch (const cocofw::ConfigError& e) {
    for (const std::string& err : e.errors()) std::cerr << "config error: " << err << "\n";
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
  }
  return std::nullopt;
}

bool prepare_out_dir(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    if (!force) {
      std::cerr << "error: output directory " << dir << " is not empty; pass --force to overwrite\n";
      return false;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name == "summary.json" || (name.rfind("trace_T", 0) == 0 && entry.path().extension() == ".csv")) {
        fs::remove(entry.path());
      }
    }
  }
  return true;
}

int execute(const cocofw::ExperimentConfig& cfg) {
  if (!prepare_out_dir(cfg.out_dir, cfg.force)) return kExitUsage;
  const cocofw::ExperimentResult result = cocofw::run_experiment(cfg, &std::cout);
  try {
    for (const fs::path& p : cocofw::write_outputs(result, cfg.out_dir)) std::cout << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  for (const json& s : result.summary["slopes"]) {
    if (s.contains("slope")) {
      std::cout << "slope " << s["algo"].get<std::string>() << " " << s["metric"].get<std::string>()
                << " " << s["slope"].get<double>() << " (r2 " << s["r_squared"].get<double>() << ")\n";
    }
  }
  for (const std::string& f : result.failures) std::cerr << "failure: " << f << "\n";
  return result.ok() ? 0 : kExitFailure;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

void read_trace(const fs::path& path, std::vector<cocofw::RunRecord>& runs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != cocofw::kCsvHeader) {
    throw std::runtime_error(path.string() + ": unexpected CSV header");
  }
  std::map<std::tuple<std::string, std::string, std::uint64_t>, cocofw::RunRecord> by_run;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 15) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 15 fields");
    }
    try {
      const auto key = std::make_tuple(f[1], f[2], std::stoull(f[3]));
      cocofw::RunRecord& r = by_run[key];
      r.algo = f[1];
      r.problem = f[2];
      r.seed = std::get<2>(key);
      cocofw::RoundRow row;
      row.t = std::stol(f[0]);
      row.cum_loss = std::stod(f[6]);
      row.ccv = std::stod(f[7]);
      r.regret_available = f[8] != "nan";
      row.regret = r.regret_available ? std::stod(f[8]) : 0.0;
      r.horizon = std::max(r.horizon, row.t);
      if (r.rows.empty() || row.t >= r.rows.back().t) {
        r.rows.assign(1, row);
      }
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  for (auto& [key, r] : by_run) runs.push_back(std::move(r));
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<cocofw::RunRecord> runs;
  try {
    for (const std::string& input : inputs) {
      const fs::path p(input);
      if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(p)) {
          const std::string name = e.path().filename().string();
          if (name.rfind("trace_T", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) read_trace(f, runs);
      } else {
        read_trace(p, runs);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  if (runs.empty()) {
    std::cerr << "error: no runs found\n";
    return kExitFailure;
  }
  const std::vector<cocofw::MeanRow> means = cocofw::seed_means(runs);
  json report{{"slopes", cocofw::slope_summary(means)}, {"means", json::array()}};
  for (const cocofw::MeanRow& m : means) {
    json e{{"algo", m.algo}, {"T", m.horizon}, {"seeds", m.seeds}, {"cum_loss", m.cum_loss}, {"ccv", m.ccv}};
    if (m.regret) e["regret"] = *m.regret;
    report["means"].push_back(e);
  }

  std::cout << std::left << std::setw(12) << "algo" << std::setw(10) << "metric" << std::setw(12)
            << "slope" << std::setw(10) << "r2" << "points\n";
  for (const json& s : report["slopes"]) {
    std::cout << std::setw(12) << s["algo"].get<std::string>() << std::setw(10)
              << s["metric"].get<std::string>();
    if (s.contains("slope")) {
      std::cout << std::setw(12) << std::setprecision(4) << s["slope"].get<double>() << std::setw(10)
                << s["r_squared"].get<double>() << s["points"].size() << "\n";
    } else {
      std::cout << "n/a (" << s["error"].get<std::string>() << ")\n";
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!(out << report.dump(2) << "\n")) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitFailure;
    }
  } else {
    std::cout << report.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-free online learning with time-varying constraints"};
  app.require_subcommand(1);

  FlagLayer run_flags;
  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run one algorithm on one problem");
  run->add_option("--config", run_config, "JSON config file");
  add_experiment_flags(run, run_flags, false);

  FlagLayer sweep_flags;
  std::string sweep_config;
  CLI::App* sweep = app.add_subcommand("sweep", "Cross algorithms, horizons and seeds");
  sweep->add_option("--config", sweep_config, "JSON config file");
  add_experiment_flags(sweep, sweep_flags, true);

  std::vector<std::string> report_inputs;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "Fit growth slopes from trace CSVs");
  report->add_option("inputs", report_inputs, "Trace CSV files or output directories")->required();
  report->add_option("--out", report_out, "Write the report JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*report) return cmd_report(report_inputs, report_out);

  const bool is_run = run->parsed();
  auto cfg = build_config(is_run ? run_config : sweep_config, is_run ? run_flags : sweep_flags);
  if (!cfg) return kExitUsage;
  if (is_run && (cfg->algos.size() != 1 || cfg->t_grid.size() != 1)) {
    std::cerr << "config error: run takes exactly one algorithm and one horizon; use sweep\n";
    return kExitUsage;
  }
  return execute(*cfg);
}
