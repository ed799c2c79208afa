#include "cocofw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "cocofw/bandit_algorithms.hpp"
#include "cocofw/frank_wolfe.hpp"
#include "cocofw/ofw_tvc.hpp"
#include "cocofw/scofw_tvc.hpp"

namespace cocofw {
namespace {

using nlohmann::json;

constexpr double kMembershipTol = 1e-9;
constexpr double kLemma3Tol = 1e-6;
constexpr double kGradBoundTol = 1e-9;
constexpr std::size_t kMaxMessages = 10;

class Checker {
 public:
  Checker(RunRecord& record, bool enabled) : record_(record), enabled_(enabled) {}

  bool enabled() const { return enabled_; }

  void check(const char* category, bool ok, long t, const std::string& detail) {
    if (!enabled_) return;
    ++record_.checks[category];
    if (ok) return;
    ++record_.violations[category];
    if (record_.messages.size() < kMaxMessages) {
      record_.messages.push_back(record_.algo + " T=" + std::to_string(record_.horizon) +
                                 " seed=" + std::to_string(record_.seed) + " t=" +
                                 std::to_string(t) + " " + category + ": " + detail);
    }
  }

 private:
  RunRecord& record_;
  bool enabled_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t seed_value(int index) { return static_cast<std::uint64_t>(index) + 1; }

}  // namespace

long RunRecord::violation_count() const {
  long n = 0;
  for (const auto& [k, v] : violations) n += v;
  return n;
}

ComparatorResult solve_comparator(const ProblemStream& stream, long iters) {
  ComparatorResult out;
  if (stream.comparator_hint()) {
    out.x_star = *stream.comparator_hint();
    out.hinted = true;
  } else {
    out.x_star = offline_frank_wolfe(aggregate(stream.rounds()), stream.meta().set,
                                     static_cast<int>(iters));
  }
  out.max_g = -std::numeric_limits<double>::infinity();
  for (const RoundFunctions& f : stream.rounds()) {
    out.max_g = std::max(out.max_g, f.constraint_value(out.x_star));
  }
  return out;
}

RunRecord run_learner(Learner& learner, const ProblemStream& stream,
                      const ComparatorResult& comparator, bool assertions) {
  RunRecord rec;
  rec.algo = learner.name();
  rec.problem = stream.meta().name;
  rec.seed = stream.seed();
  rec.horizon = stream.size();
  rec.regret_available = comparator.feasible();
  rec.comparator_max_g = comparator.max_g;
  rec.rows.reserve(stream.size());
  Checker checker(rec, assertions);

  const SurrogateParams& sp = learner.surrogate_params();
  const LyapunovFn& phi = learner.lyapunov();
  const FeasibleSet& set = stream.meta().set;
  const double G = stream.meta().lipschitz_G;
  const Vector& xs = comparator.x_star;

  double cum_loss = 0.0;
  double cum_loss_star = 0.0;
  double cum_surr = 0.0;
  double cum_surr_star = 0.0;
  double penalty = 0.0;
  double penalty_star = 0.0;
  double prev_q = 0.0;
  double max_bound = 0.0;
  int last_epoch = 1;
  bool has_doubling = false;

  long t = 0;
  for (const RoundFunctions& round : stream.rounds()) {
    ++t;
    const RoundDiag diag = learner.step(round);
    RoundRow row;
    row.t = t;
    row.f_value = diag.f_value;
    row.g_value = diag.g_value;
    row.ccv = diag.q;
    row.epoch = diag.epoch;
    row.g_tilde = diag.g_tilde;
    row.block = diag.block;
    row.sigma = diag.sigma;
    row.clamped = diag.clamped;
    rec.clamped_rounds += diag.clamped ? 1 : 0;
    rec.saturated_rounds += diag.phi_saturated ? 1 : 0;

    const PhiValue pv = phi_eval(phi, sp.beta * diag.q);
    const double f_star = round.loss_value(xs);
    const double g_star = round.constraint_value(xs);
    cum_loss += diag.f_value;
    cum_loss_star += f_star;
    cum_surr += diag.surrogate_value;
    cum_surr_star += surrogate_value(sp, phi, diag.q, f_star, g_star);
    penalty += sp.beta * pv.phi_prime * g_plus(diag.g_value);
    penalty_star += sp.beta * pv.phi_prime * g_plus(g_star);
    row.cum_loss = cum_loss;
    row.regret = cum_loss - cum_loss_star;
    row.surrogate_regret = cum_surr - cum_surr_star;
    row.lemma3_slack = penalty - penalty_star - pv.phi;

    if (checker.enabled()) {
      checker.check(kCheckFeasibility, contains(set, diag.x, kMembershipTol), t,
                    "played point outside K");
      checker.check(kCheckCcvMonotone, diag.q >= prev_q, t,
                    "Q decreased from " + fmt(prev_q) + " to " + fmt(diag.q));
      checker.check(kCheckDrift, diag.drift_ok, t, "Lyapunov drift bound failed");
      if (rec.regret_available) {
        checker.check(kCheckLemma3, row.lemma3_slack >= -kLemma3Tol, t,
                      "surrogate regret falls short by " + fmt(-row.lemma3_slack));
      }
      const Vector grad = surrogate_subgrad(sp, phi, diag.q, round.loss_subgrad(diag.x),
                                            diag.g_value, round.constraint_subgrad(diag.x));
      const double bound = surrogate_grad_bound(sp, phi, G, diag.q);
      // Relative slack for the large-gamma parameterisations.
      checker.check(kCheckGradBound, grad.norm() <= bound + kGradBoundTol + 1e-12 * bound, t,
                    "surrogate gradient norm " + fmt(grad.norm()) + " exceeds " + fmt(bound));
      if (diag.doubling_checked) {
        has_doubling = true;
        max_bound = std::max(max_bound, diag.grad_bound);
        const bool covers = diag.g_tilde >= diag.grad_bound;
        const bool power = diag.g_tilde == std::ldexp(1.0, diag.epoch - 1);
        checker.check(kCheckDoubling, covers && power, t,
                      "g_tilde " + fmt(diag.g_tilde) + " epoch " + std::to_string(diag.epoch) +
                          " bound " + fmt(diag.grad_bound));
        last_epoch = diag.epoch;
      }
    }
    prev_q = diag.q;
    rec.rows.push_back(row);
  }

  if (checker.enabled() && has_doubling) {
    const double limit = std::max(1.0, std::log2(max_bound) + 2.0);
    checker.check(kCheckEpochCount, last_epoch <= limit, t,
                  "epoch " + std::to_string(last_epoch) + " exceeds " + fmt(limit));
  }
  return rec;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("fit_slope: need at least 2 points");
  SlopeFit fit;
  for (const auto& [T, m] : points) {
    if (!(T > 0.0)) throw std::invalid_argument("fit_slope: horizons must be positive");
    if (!(m > 0.0)) {
      throw std::invalid_argument("fit_slope: metric must be positive, got " + fmt(m));
    }
    fit.points.emplace_back(std::log(T), std::log(m));
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : fit.points) {
    mx += x / n;
    my += y / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: need at least 2 distinct horizons");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    double sse = 0.0;
    for (const auto& [x, y] : fit.points) {
      const double e = y - (fit.intercept + fit.slope * x);
      sse += e * e;
    }
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return fit;
}

ProblemStream make_problem(const ExperimentConfig& cfg, long T, std::uint64_t seed) {
  const ProblemConfig& p = cfg.problem_config;
  switch (cfg.problem) {
    case ProblemKind::kSyntheticLinear:
    case ProblemKind::kSyntheticQuadratic: {
      ProblemMeta meta;
      meta.name = to_string(cfg.problem);
      switch (p.set) {
        case SetKind::kBox:
          meta.set = FeasibleSet::Box(p.dim, p.radius);
          break;
        case SetKind::kSimplex:
          meta.set = FeasibleSet::Simplex(p.dim, p.radius);
          break;
        default:
          meta.set = FeasibleSet::L2Ball(p.dim, p.radius);
          break;
      }
      meta.lipschitz_G = p.lipschitz;
      meta.horizon_T = T;
      const bool quad = cfg.problem == ProblemKind::kSyntheticQuadratic;
      meta.strong_convexity_alpha = quad ? p.alpha_f.value_or(0.0) : 0.0;
      return gen_synthetic(meta, seed, quad ? SyntheticMode::kQuadratic : SyntheticMode::kLinear,
                           {p.drift, p.slack_max});
    }
    case ProblemKind::kMatrixCompletion: {
      CompletionOptions o;
      o.rows = p.rows;
      o.cols = p.cols;
      o.rank = p.rank;
      o.obs_per_round = p.obs_per_round;
      o.horizon_T = T;
      o.offset_mode = p.offset_mode.value_or(OffsetMode::kFeasible);
      o.trace_bound = p.trace_bound;
      o.inner_radius = p.inner_radius;
      o.slack_max = p.slack_max;
      return gen_matrix_completion(o, seed);
    }
    case ProblemKind::kMovieLens: {
      MovieLensOptions o;
      o.horizon_T = T;
      o.obs_per_round = p.obs_per_round;
      o.offset_mode = p.offset_mode.value_or(OffsetMode::kPaper);
      if (p.trace_bound) o.trace_bound = *p.trace_bound;
      o.inner_radius = p.inner_radius;
      o.slack_max = p.slack_max;
      return load_movielens(p.data_path, o, seed);
    }
  }
  throw std::logic_error("make_problem: unknown problem kind");
}

LearnerBundle make_learner(const ExperimentConfig& cfg, Algo algo, const ProblemMeta& meta,
                           std::uint64_t seed) {
  const Overrides& o = cfg.overrides;
  LearnerBundle out;
  json& j = out.params;
  j["G"] = meta.lipschitz_G;
  j["M"] = meta.value_bound_M;
  j["D"] = meta.set.diameter();
  j["r"] = meta.set.inner_radius();
  j["d"] = meta.set.dimension();
  j["T"] = meta.horizon_T;
  j["alpha_f"] = meta.strong_convexity_alpha;
  auto apply_surrogate = [&](SurrogateParams& sp) {
    if (o.beta) sp.beta = *o.beta;
    if (o.gamma) sp.gamma = *o.gamma;
    j["beta"] = sp.beta;
    j["gamma"] = sp.gamma;
  };
  auto describe_phi = [&](const LyapunovFn& phi) {
    j["phi"] = to_string(phi.kind);
    if (phi.kind == LyapunovKind::kExp) j["lambda"] = phi.lambda;
  };
  const char* variant = cfg.beta_variant == BetaVariant::kAppendix ? "appendix" : "theorem";

  switch (algo) {
    case Algo::kOfw: {
      OfwParams p = ofw_defaults(meta);
      apply_surrogate(p.surrogate);
      if (o.lambda) p.phi = LyapunovFn::Exp(*o.lambda);
      describe_phi(p.phi);
      j["eta_1"] = learning_rate(meta.set.diameter(), 1.0, meta.horizon_T);
      out.learner = std::make_unique<OfwTvc>(meta, p);
      break;
    }
    case Algo::kScofw: {
      ScofwParams p = scofw_defaults(meta, cfg.beta_variant);
      apply_surrogate(p.surrogate);
      describe_phi(p.phi);
      j["beta_variant"] = variant;
      auto learner = std::make_unique<ScofwTvc>(meta, p);
      j["c1"] = learner->c1();
      out.learner = std::move(learner);
      break;
    }
    case Algo::kBfw: {
      BfwParams p = bfw_defaults(meta, o.c);
      apply_surrogate(p.surrogate);
      if (o.lambda) p.phi = LyapunovFn::Exp(*o.lambda);
      if (o.delta) p.delta = *o.delta;
      if (o.block_k) p.block_k = *o.block_k;
      if (o.epsilon) p.epsilon = *o.epsilon;
      describe_phi(p.phi);
      j["c"] = p.c;
      j["delta"] = p.delta;
      j["block_k"] = p.block_k;
      j["epsilon"] = p.epsilon;
      out.learner = std::make_unique<BfwTvc>(meta, p, seed);
      break;
    }
    case Algo::kScbfw: {
      ScbfwParams p = scbfw_defaults(meta, o.c, cfg.beta_variant);
      apply_surrogate(p.surrogate);
      if (o.delta) p.delta = *o.delta;
      if (o.block_k) p.block_k = *o.block_k;
      if (o.inner_l) p.inner_l = *o.inner_l;
      describe_phi(p.phi);
      j["beta_variant"] = variant;
      j["c"] = p.c;
      j["delta"] = p.delta;
      j["block_k"] = p.block_k;
      j["inner_l"] = p.inner_l;
      out.learner = std::make_unique<ScbfwTvc>(meta, p, seed);
      break;
    }
  }
  return out;
}

RunRecord run_single(const ExperimentConfig& cfg, Algo algo, long T, std::uint64_t seed,
                     long comparator_iters, bool keep_rows) {
  RunRecord rec;
  try {
    const ProblemStream stream = make_problem(cfg, T, seed);
    LearnerBundle bundle = make_learner(cfg, algo, stream.meta(), seed);
    const ComparatorResult comparator = solve_comparator(stream, comparator_iters);
    rec = run_learner(*bundle.learner, stream, comparator, cfg.assertions);
    rec.params = std::move(bundle.params);
    rec.params["comparator"] = comparator.hinted ? "hint" : "frank-wolfe";
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.algo = to_string(algo);
  rec.problem = to_string(cfg.problem);
  rec.seed = seed;
  rec.horizon = T;
  if (!keep_rows && !rec.rows.empty()) rec.rows.erase(rec.rows.begin(), rec.rows.end() - 1);
  return rec;
}

int worker_threads(std::size_t jobs) {
  long n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COCOFW_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, cap);
  }
  return static_cast<int>(std::max<long>(1, std::min<long>(n, static_cast<long>(jobs))));
}

std::vector<MeanRow> seed_means(const std::vector<RunRecord>& runs) {
  std::map<std::pair<std::string, long>, std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) {
    if (r.error.empty() && !r.rows.empty()) groups[{r.algo, r.horizon}].push_back(&r);
  }
  std::vector<MeanRow> out;
  for (const auto& [key, members] : groups) {
    MeanRow m;
    m.algo = key.first;
    m.horizon = key.second;
    m.seeds = static_cast<int>(members.size());
    bool regret = true;
    double regret_sum = 0.0;
    for (const RunRecord* r : members) {
      m.cum_loss += r->rows.back().cum_loss / m.seeds;
      m.ccv += r->rows.back().ccv / m.seeds;
      regret = regret && r->regret_available;
      regret_sum += r->rows.back().regret;
    }
    if (regret) m.regret = regret_sum / m.seeds;
    out.push_back(m);
  }
  return out;
}

json slope_summary(const std::vector<MeanRow>& means) {
  std::map<std::string, std::vector<const MeanRow*>> by_algo;
  for (const MeanRow& m : means) by_algo[m.algo].push_back(&m);
  json out = json::array();
  for (const auto& [algo, rows] : by_algo) {
    for (const char* metric : {"regret", "ccv", "cum_loss"}) {
      json entry{{"algo", algo}, {"metric", metric}};
      std::vector<std::pair<double, double>> pts;
      bool missing = false;
      for (const MeanRow* m : rows) {
        std::optional<double> v;
        if (std::string(metric) == "regret") {
          v = m->regret;
        } else {
          v = std::string(metric) == "ccv" ? m->ccv : m->cum_loss;
        }
        if (!v) {
          missing = true;
          break;
        }
        pts.emplace_back(static_cast<double>(m->horizon), *v);
      }
      if (missing) {
        entry["error"] = "regret unavailable (no feasible comparator)";
      } else {
        try {
          const SlopeFit fit = fit_slope(pts);
          entry["slope"] = fit.slope;
          entry["intercept"] = fit.intercept;
          entry["r_squared"] = fit.r_squared;
          json p = json::array();
          for (const auto& [x, y] : fit.points) p.push_back({x, y});
          entry["points"] = p;
        } catch (const std::invalid_argument& e) {
          entry["error"] = e.what();
        }
      }
      out.push_back(entry);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  struct Job {
    Algo algo;
    long T;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Algo a : cfg.algos) {
    for (long T : cfg.t_grid) {
      for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({a, T, seed_value(s)});
    }
  }
  const long t_max = *std::max_element(cfg.t_grid.begin(), cfg.t_grid.end());
  const long comparator_iters = cfg.comparator_iters.value_or(10 * t_max);

  std::mutex log_mutex;
  if (log) *log << "running " << jobs.size() << " runs\n";
  ExperimentResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      result.runs[i] = run_single(cfg, job.algo, job.T, job.seed, comparator_iters);
      if (log) {
        const RunRecord& r = result.runs[i];
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << "  " << r.algo << " T=" << r.horizon << " seed=" << r.seed << ": "
             << (r.ok() ? "ok" : "FAILED") << "\n";
      }
    }
  };
  const int threads = worker_threads(jobs.size());
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  std::sort(result.runs.begin(), result.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.algo, a.problem, a.seed, a.horizon) <
           std::tie(b.algo, b.problem, b.seed, b.horizon);
  });

  json runs = json::array();
  for (const RunRecord& r : result.runs) {
    json entry{{"algo", r.algo}, {"problem", r.problem}, {"seed", r.seed}, {"T", r.horizon},
               {"params", r.params}, {"regret_available", r.regret_available},
               {"comparator_max_g", r.comparator_max_g}, {"violations", r.violations},
               {"clamped_rounds", r.clamped_rounds}, {"saturated_rounds", r.saturated_rounds}};
    if (!r.rows.empty()) {
      const RoundRow& last = r.rows.back();
      entry["final"] = {{"cum_loss", last.cum_loss}, {"ccv", last.ccv}};
      if (r.regret_available) {
        entry["final"]["regret"] = last.regret;
        entry["final"]["surrogate_regret"] = last.surrogate_regret;
      }
    }
    if (!r.error.empty()) {
      entry["error"] = r.error;
      result.failures.push_back(r.algo + " T=" + std::to_string(r.horizon) +
                                " seed=" + std::to_string(r.seed) + ": " + r.error);
    }
    for (const std::string& m : r.messages) result.failures.push_back(m);
    if (r.messages.size() < static_cast<std::size_t>(r.violation_count())) {
      result.failures.push_back(r.algo + " T=" + std::to_string(r.horizon) +
                                " seed=" + std::to_string(r.seed) + ": " +
                                std::to_string(r.violation_count()) + " invariant violations in total");
    }
    runs.push_back(entry);
  }

  result.means = seed_means(result.runs);
  json means = json::array();
  for (const MeanRow& m : result.means) {
    json e{{"algo", m.algo},
           {"T", m.horizon},
           {"seeds", m.seeds},
           {"cum_loss", m.cum_loss},
           {"ccv", m.ccv},
           {"ccv_over_T", m.ccv / static_cast<double>(m.horizon)}};
    if (m.regret) e["regret"] = *m.regret;
    means.push_back(e);
  }
  result.summary = {{"config", to_json(cfg)},     {"comparator_iters", comparator_iters},
                    {"runs", runs},               {"means", means},
                    {"slopes", slope_summary(result.means)}, {"failures", result.failures}};
  return result;
}

void write_csv(std::ostream& out, const std::vector<const RunRecord*>& runs) {
  out << kCsvHeader << "\n";
  for (const RunRecord* r : runs) {
    for (const RoundRow& row : r->rows) {
      out << row.t << ',' << r->algo << ',' << r->problem << ',' << r->seed << ','
          << fmt(row.f_value) << ',' << fmt(row.g_value) << ',' << fmt(row.cum_loss) << ','
          << fmt(row.ccv) << ',' << (r->regret_available ? fmt(row.regret) : "nan") << ','
          << (r->regret_available ? fmt(row.surrogate_regret) : "nan") << ',' << row.epoch << ','
          << fmt(row.g_tilde) << ',' << row.block << ',' << fmt(row.sigma) << ','
          << (row.clamped ? 1 : 0) << "\n";
    }
  }
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<long, std::vector<const RunRecord*>> by_T;
  for (const RunRecord& r : result.runs) by_T[r.horizon].push_back(&r);
  std::vector<std::filesystem::path> written;
  auto open = [](const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
  };
  for (const auto& [T, runs] : by_T) {
    const auto path = dir / ("trace_T" + std::to_string(T) + ".csv");
    std::ofstream out = open(path);
    write_csv(out, runs);
    if (!out) throw std::runtime_error("write failed: " + path.string());
    written.push_back(path);
  }
  const auto path = dir / "summary.json";
  std::ofstream out = open(path);
  out << result.summary.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
  written.push_back(path);
  return written;
}

}  // namespace cocofw
