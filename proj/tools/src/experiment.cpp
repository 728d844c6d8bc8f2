#include "esbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "estseq/dataset.hpp"
#include "estseq/rng.hpp"

namespace esbench {

using namespace estseq;

namespace {

// Runs fn(job) for job in [0, count) on up to `threads` workers (0: all
// cores) and rethrows the first failure in job order.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  if (count == 0) return;
  if (threads == 0) threads = std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, count);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&]() {
    for (std::size_t job = next++; job < count; job = next++) {
      try {
        fn(job);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double LambdaRule::resolve(std::size_t n) const {
  switch (kind) {
    case Kind::inv_10n: return 1.0 / (10.0 * static_cast<double>(n));
    case Kind::inv_100n: return 1.0 / (100.0 * static_cast<double>(n));
    case Kind::value: return value;
  }
  return value;
}

std::string LambdaRule::describe() const {
  switch (kind) {
    case Kind::inv_10n: return "1/10n";
    case Kind::inv_100n: return "1/100n";
    case Kind::value: {
      std::ostringstream os;
      os << value;
      return os.str();
    }
  }
  return "?";
}

LambdaRule LambdaRule::parse(const std::string& text) {
  if (text == "1/10n") return {Kind::inv_10n, 0.0};
  if (text == "1/100n") return {Kind::inv_100n, 0.0};
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0) || !std::isfinite(v))
    throw std::invalid_argument("bad lambda '" + text +
                                "' (expected 1/10n, 1/100n or a non-negative number)");
  return {Kind::value, v};
}

void ExperimentSpec::validate() const {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (algorithms.empty()) throw std::invalid_argument("no algorithm given");
  for (const auto& a : algorithms) {
    if (is_algorithm(a)) continue;
    std::string names;
    for (const auto& n : algorithm_names()) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown algorithm '" + a + "' (valid: " + names + ")");
  }
  if (!(passes > 0.0)) throw std::invalid_argument("passes must be positive");
  if (dropout > 0.0 && gauss_noise > 0.0)
    throw std::invalid_argument("choose either DropOut or gaussian noise, not both");
  if (!(dropout >= 0.0 && dropout < 1.0))
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!(gauss_noise >= 0.0)) throw std::invalid_argument("gaussian noise must be non-negative");
  if (eval_every && !(*eval_every > 0.0))
    throw std::invalid_argument("eval-every must be positive");
}

double ExperimentSpec::resolved_eval_every() const {
  if (eval_every) return *eval_every;
  return dropout > 0.0 || gauss_noise > 0.0 ? 5.0 : 1.0;
}

Problem build_problem(const ExperimentSpec& spec) {
  std::shared_ptr<const Dataset> data;
  if (spec.data.path) {
    data = std::make_shared<const Dataset>(
        normalize_rows(read_libsvm(*spec.data.path, spec.data.dim_override)));
  } else {
    data = std::make_shared<const Dataset>(
        synthesize(spec.data.n, spec.data.p, spec.data.seed, spec.data.flip));
  }
  NoiseModel noise = NoiseModel::none();
  if (spec.dropout > 0.0) noise = NoiseModel::dropout(spec.dropout);
  if (spec.gauss_noise > 0.0) noise = NoiseModel::gaussian(spec.gauss_noise);
  const double lambda = spec.lambda.resolve(data->rows());
  return Problem(data, spec.loss, lambda, spec.psi, noise);
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) {
  return mix_seed(master, static_cast<std::uint64_t>(replicate));
}

std::vector<std::uint64_t> evaluation_mask_seeds(std::size_t n, std::uint64_t master_seed,
                                                 std::size_t per_point) {
  RandomStream rng(mix_seed(master_seed, hash_tag("evaluation-masks")));
  std::vector<std::uint64_t> seeds(n * per_point);
  for (auto& s : seeds) s = rng.next_seed();
  return seeds;
}

FStarMode resolve_fstar_mode(const Problem& problem, FStarMode requested) {
  if (requested != FStarMode::automatic) return requested;
  if (problem.noise.active() || !gap_available(problem)) return FStarMode::best_point;
  return FStarMode::dual_gap;
}

Certificate solve_certified(const Problem& problem, double gap_target,
                            std::size_t max_iterations) {
  if (!gap_available(problem))
    throw std::invalid_argument("dual_gap mode needs lambda > 0, psi = none and no DropOut");
  const auto dist = make_distribution(SamplingMode::uniform, smoothness(problem).L);
  const Schedule schedule =
      make_schedule(ScheduleKind::constant, problem, dist, StepMode::experiment);
  Solver solver(problem, Variant::C, make_estimator(EstimatorKind::exact, problem, dist),
                schedule, 0);
  solver.init(Vec::Zero(problem.p()));

  Certificate out;
  out.x = solver.state().x;
  out.gap = duality_gap(problem, out.x);
  for (std::size_t k = 1; k <= max_iterations && out.gap > gap_target; ++k) {
    solver.step();
    if (k % 10 == 0) {
      const double gap = duality_gap(problem, solver.state().x);
      if (gap < out.gap) {
        out.gap = gap;
        out.x = solver.state().x;
        out.iterations = k;
      }
    }
  }
  out.converged = out.gap <= gap_target;
  out.value = full_objective(problem, out.x);
  return out;
}

FStar estimate_f_star(const Problem& problem, FStarMode mode, double passes,
                      const std::vector<std::string>& algorithms, std::uint64_t seed,
                      StepMode step_mode, double gap_target, std::size_t threads) {
  mode = resolve_fstar_mode(problem, mode);
  if (mode == FStarMode::dual_gap) {
    const auto cert = solve_certified(problem, gap_target);
    return {cert.value, FStarMode::dual_gap, cert.gap, cert.converged};
  }

  FStar out;
  out.mode = FStarMode::best_point;
  out.gap = std::numeric_limits<double>::quiet_NaN();
  out.value = std::numeric_limits<double>::infinity();
  const auto masks = evaluation_mask_seeds(problem.n(), seed);
  std::vector<double> best(algorithms.size(), std::numeric_limits<double>::infinity());
  parallel_for(algorithms.size(), threads, [&](std::size_t a) {
    const auto& name = algorithms[a];
    RunConfig config = algorithm_config(name, problem, step_mode);
    config.seed = mix_seed(seed, hash_tag("fstar:" + name));
    config.max_passes = passes;
    config.eval_every = 5.0;
    config.compute_gap = false;
    config.evaluate = [&problem, &masks](const Vec& x) {
      return expected_objective(problem, x, masks, 5);
    };
    const auto trace = run(config, problem);
    for (const auto& row : trace.rows) {
      if (std::isfinite(row.objective)) best[a] = std::min(best[a], row.objective);
      if (std::isfinite(row.objective_avg)) best[a] = std::min(best[a], row.objective_avg);
    }
  });
  for (double v : best) out.value = std::min(out.value, v);
  out.converged = std::isfinite(out.value);
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_row(std::string& out, const std::string& algo, const std::string& replicate,
                double pass, double objective, double objective_avg, double gap, double fstar,
                bool diverged) {
  out += algo;
  out += ',';
  out += replicate;
  out += ',';
  append_number(out, pass);
  out += ',';
  append_number(out, objective);
  out += ',';
  append_number(out, objective_avg);
  out += ',';
  append_number(out, gap);
  out += ',';
  append_number(out, std::isnan(objective) ? objective : std::max(objective - fstar, 1e-16));
  out += ',';
  out += diverged ? '1' : '0';
  out += '\n';
}

}  // namespace

std::string format_csv(const std::vector<std::string>& algorithms,
                       const std::vector<std::vector<RunTrace>>& traces, double fstar) {
  std::string out = kCsvHeader;
  out += '\n';
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    const auto& reps = traces[a];
    for (std::size_t r = 0; r < reps.size(); ++r) {
      const auto& rows = reps[r].rows;
      for (std::size_t j = 0; j < rows.size(); ++j) {
        const bool div = reps[r].diverged && j + 1 == rows.size();
        append_row(out, algorithms[a], std::to_string(r), rows[j].pass, rows[j].objective,
                   rows[j].objective_avg, rows[j].gap, fstar, div);
      }
    }
    if (reps.size() <= 1) continue;

    struct Acc {
      double obj = 0, avg = 0, gap = 0;
      std::size_t count = 0;
      bool diverged = false;
    };
    std::map<double, Acc> by_pass;
    for (const auto& rep : reps) {
      for (const auto& row : rep.rows) {
        auto& acc = by_pass[row.pass];
        if (std::isnan(row.objective)) {
          acc.diverged = true;
          continue;
        }
        acc.obj += row.objective;
        acc.avg += row.objective_avg;
        acc.gap += row.gap;
        ++acc.count;
      }
    }
    for (const auto& [pass, acc] : by_pass) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const double c = static_cast<double>(acc.count);
      append_row(out, algorithms[a], "mean", pass, acc.count ? acc.obj / c : nan,
                 acc.count ? acc.avg / c : nan, acc.count ? acc.gap / c : nan, fstar,
                 acc.diverged);
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Problem problem = build_problem(spec);
  const auto masks = evaluation_mask_seeds(problem.n(), spec.seed);
  const auto evaluate = [&problem, &masks](const Vec& x) {
    return expected_objective(problem, x, masks, 5);
  };

  ExperimentResult result;
  result.algorithms = spec.algorithms;
  const std::size_t A = spec.algorithms.size();
  const std::size_t R = spec.replicates;
  result.traces.assign(A, std::vector<RunTrace>(R));

  std::vector<RunConfig> configs;
  configs.reserve(A * R);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t r = 0; r < R; ++r) {
      RunConfig c = algorithm_config(spec.algorithms[a], problem, spec.mode);
      c.seed = replicate_seed(spec.seed, r);
      c.max_passes = spec.passes;
      c.eval_every = spec.resolved_eval_every();
      if (spec.stage1_passes >= 0.0) c.stage1_passes = spec.stage1_passes;
      if (spec.sampling == SamplingMode::lipschitz && c.estimator != EstimatorKind::saga_uniform)
        c.sampling = SamplingMode::lipschitz;
      c.evaluate = evaluate;
      configs.push_back(std::move(c));
    }
  }

  parallel_for(configs.size(), spec.threads, [&](std::size_t job) {
    result.traces[job / R][job % R] = run(configs[job], problem);
  });

  result.fstar = estimate_f_star(problem, spec.fstar_mode, spec.fstar_passes, spec.algorithms,
                                 spec.seed, spec.mode, 1e-10, spec.threads);
  // F* must lower-bound every plotted value.
  for (const auto& reps : result.traces)
    for (const auto& trace : reps)
      for (const auto& row : trace.rows)
        if (std::isfinite(row.objective)) result.fstar.value = std::min(result.fstar.value, row.objective);

  result.csv = format_csv(result.algorithms, result.traces, result.fstar.value);
  return result;
}

}  // namespace esbench
