#include "esbench/cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

namespace esbench {

using namespace estseq;

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("bad value '" + text + "' for " + key);
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

FStarMode parse_fstar_mode(const std::string& text) {
  if (text == "auto") return FStarMode::automatic;
  if (text == "dual_gap") return FStarMode::dual_gap;
  if (text == "best_point") return FStarMode::best_point;
  throw std::invalid_argument("unknown fstar mode '" + text +
                              "' (expected auto, dual_gap or best_point)");
}

SamplingMode parse_sampling(const std::string& text) {
  if (text == "uniform") return SamplingMode::uniform;
  if (text == "lipschitz") return SamplingMode::lipschitz;
  throw std::invalid_argument("unknown sampling '" + text + "' (expected uniform or lipschitz)");
}

}  // namespace

DataSource parse_synthetic(const std::string& text) {
  DataSource d;
  for (const auto& kv : split(text, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "n") {
      d.n = parse_number<std::size_t>(key, val);
    } else if (key == "p") {
      d.p = parse_number<std::int64_t>(key, val);
    } else if (key == "seed") {
      d.seed = parse_number<std::uint64_t>(key, val);
    } else if (key == "flip") {
      d.flip = parse_number<double>(key, val);
    } else {
      throw std::invalid_argument("unknown synthetic key '" + key + "' (expected n, p, seed, flip)");
    }
  }
  if (d.n < 1 || d.p < 1) throw std::invalid_argument("synthetic n and p must be at least 1");
  if (!(d.flip >= 0.0 && d.flip < 0.5)) throw std::invalid_argument("flip must lie in [0, 0.5)");
  return d;
}

CliParse parse_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Runs stochastic composite optimization experiments and writes convergence CSV."};
  app.set_config("--config", "", "INI recipe file with option=value lines");

  std::string data, synthetic, loss = "logistic", psi = "none", lambda = "1/10n";
  std::string algo, mode = "experiment", fstar_mode = "auto", sampling = "uniform", out_path;
  double dropout = 0.0, gauss = 0.0, passes = 100.0, stage1 = -1.0, fstar_passes = 1000.0;
  std::size_t replicates = 5, threads = 0;
  std::int64_t dim = -1;
  std::uint64_t seed = 0;
  std::optional<double> eval_every;

  auto* data_opt = app.add_option("--data", data, "libsvm file (rows are normalized)");
  auto* syn_opt = app.add_option("--synthetic", synthetic, "n=..,p=..,seed=..,flip=..");
  data_opt->excludes(syn_opt);
  app.add_option("--dim", dim, "dimension override for --data");
  app.add_option("--loss", loss, "logistic|sqhinge")->capture_default_str();
  app.add_option("--psi", psi, "none|l1:<theta>|ball:<r>")->capture_default_str();
  app.add_option("--lambda", lambda, "1/10n, 1/100n or a number")->capture_default_str();
  auto* drop_opt = app.add_option("--dropout", dropout, "DropOut rate");
  auto* gauss_opt = app.add_option("--gauss-noise", gauss, "gaussian gradient noise level");
  drop_opt->excludes(gauss_opt);
  app.add_option("--algo", algo, "comma-separated algorithm names")->required();
  app.add_option("--passes", passes, "pass budget per run")->capture_default_str();
  app.add_option("--replicates", replicates, "replicates per algorithm")->capture_default_str();
  app.add_option("--seed", seed, "master seed")->envname(kSeedEnvVar)->capture_default_str();
  app.add_option("--mode", mode, "theory|experiment")->capture_default_str();
  app.add_option("--eval-every", eval_every, "evaluation cadence in passes (default 1, 5 under noise)");
  app.add_option("--stage1-passes", stage1, "stage-1 budget; negative switches on plateau");
  app.add_option("--fstar-mode", fstar_mode, "auto|dual_gap|best_point")->capture_default_str();
  app.add_option("--fstar-passes", fstar_passes, "pass budget of best_point runs")
      ->capture_default_str();
  app.add_option("--sampling", sampling, "uniform|lipschitz")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--out", out_path, "CSV path (default stdout)");

  CliParse result;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    result.exit_code = app.exit(e, out, err);
    return result;
  }

  try {
    ExperimentSpec spec;
    if (!data.empty()) {
      spec.data.path = data;
      spec.data.dim_override = dim;
    } else if (!synthetic.empty()) {
      spec.data = parse_synthetic(synthetic);
    } else {
      throw std::invalid_argument("no dataset: pass --data <path> or --synthetic n=..,p=..");
    }
    spec.loss = parse_loss(loss);
    spec.psi = Regularizer::parse(psi);
    spec.lambda = LambdaRule::parse(lambda);
    spec.dropout = dropout;
    spec.gauss_noise = gauss;
    spec.algorithms = split(algo, ',');
    spec.passes = passes;
    spec.replicates = replicates;
    spec.seed = seed;
    spec.mode = parse_step_mode(mode);
    spec.eval_every = eval_every;
    spec.stage1_passes = stage1;
    spec.fstar_mode = parse_fstar_mode(fstar_mode);
    spec.fstar_passes = fstar_passes;
    spec.sampling = parse_sampling(sampling);
    spec.threads = threads;
    spec.out = out_path;
    spec.validate();
    result.spec = std::move(spec);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n" << app.help();
    result.exit_code = 2;
  }
  return result;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto parsed = parse_cli(argc, argv, out, err);
  if (!parsed.spec) return parsed.exit_code;
  const ExperimentSpec& spec = *parsed.spec;
  try {
    const auto result = run_experiment(spec);
    if (spec.out.empty()) {
      out << result.csv;
    } else {
      std::ofstream file(spec.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + spec.out);
      file << result.csv;
    }
    err << "F* = " << std::setprecision(17) << result.fstar.value << " ("
        << (result.fstar.mode == FStarMode::dual_gap ? "dual_gap" : "best_point") << ")\n";
    if (!result.fstar.converged)
      err << "warning: F* budget ran out before the gap target (gap " << result.fstar.gap
          << ")\n";
    for (std::size_t a = 0; a < result.algorithms.size(); ++a)
      for (std::size_t r = 0; r < result.traces[a].size(); ++r)
        if (result.traces[a][r].diverged)
          err << "warning: " << result.algorithms[a] << " replicate " << r
              << " diverged: " << result.traces[a][r].message << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace esbench
