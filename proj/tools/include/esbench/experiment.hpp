#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "estseq/objective.hpp"
#include "estseq/sequences.hpp"
#include "estseq/solvers.hpp"

namespace esbench {

using estseq::Vec;

struct DataSource {
  std::optional<std::string> path;  // libsvm file; otherwise synthetic
  std::int64_t dim_override = -1;
  std::size_t n = 1000;
  std::int64_t p = 50;
  std::uint64_t seed = 1;
  double flip = 0.05;
};

// lambda as 1/(10n), 1/(100n) or an explicit value.
struct LambdaRule {
  enum class Kind { inv_10n, inv_100n, value };
  Kind kind = Kind::inv_10n;
  double value = 0.0;

  double resolve(std::size_t n) const;
  std::string describe() const;
  static LambdaRule parse(const std::string& text);
};

enum class FStarMode { automatic, dual_gap, best_point };

struct ExperimentSpec {
  DataSource data;
  estseq::Loss loss = estseq::Loss::logistic;
  estseq::Regularizer psi;
  LambdaRule lambda;
  double dropout = 0.0;
  double gauss_noise = 0.0;
  std::vector<std::string> algorithms;
  double passes = 100.0;
  std::size_t replicates = 5;
  std::uint64_t seed = 0;
  estseq::StepMode mode = estseq::StepMode::experiment;
  std::optional<double> eval_every;  // default 1 pass, 5 under noise
  double stage1_passes = -1.0;
  FStarMode fstar_mode = FStarMode::automatic;
  double fstar_passes = 1000.0;
  estseq::SamplingMode sampling = estseq::SamplingMode::uniform;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::string out;          // empty: stdout

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  double resolved_eval_every() const;
};

// Loads or synthesizes the data (file data is normalized to unit rows) and
// builds the problem.
estseq::Problem build_problem(const ExperimentSpec& spec);

struct FStar {
  double value = 0.0;
  FStarMode mode = FStarMode::dual_gap;
  double gap = 0.0;        // certificate in dual_gap mode, NaN otherwise
  bool converged = true;   // false: budget ran out before the gap target
};

// dual_gap: accelerated gradient descent until the Fenchel gap is <= 1e-10,
// returning the primal value. best_point: the minimum evaluated objective over
// runs of `algorithms` with `passes` each, run on `threads` workers.
FStar estimate_f_star(const estseq::Problem& problem, FStarMode mode, double passes,
                      const std::vector<std::string>& algorithms = {"rand-SVRG"},
                      std::uint64_t seed = 0, estseq::StepMode step_mode = estseq::StepMode::experiment,
                      double gap_target = 1e-10, std::size_t threads = 1);

struct Certificate {
  Vec x;
  double value = 0.0;  // F(x)
  double gap = 0.0;    // duality gap at x
  std::size_t iterations = 0;
  bool converged = false;
};

// Accelerated full-gradient descent from 0 until the duality gap at x is at
// most gap_target. Needs gap_available(problem).
Certificate solve_certified(const estseq::Problem& problem, double gap_target,
                            std::size_t max_iterations = 200000);

FStarMode resolve_fstar_mode(const estseq::Problem& problem, FStarMode requested);

// Per-component mask seeds for the DropOut objective, 5 per point.
std::vector<std::uint64_t> evaluation_mask_seeds(std::size_t n, std::uint64_t master_seed,
                                                 std::size_t per_point = 5);

struct ExperimentResult {
  std::vector<std::string> algorithms;
  // traces[a][r] for algorithm a, replicate r.
  std::vector<std::vector<estseq::RunTrace>> traces;
  FStar fstar;
  std::string csv;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "algo,replicate,pass,objective,objective_avg_iterate,dual_gap,fstar_gap,diverged";

std::string format_csv(const std::vector<std::string>& algorithms,
                       const std::vector<std::vector<estseq::RunTrace>>& traces, double fstar);

// Seed of replicate r, mix_seed(master, r).
std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate);

}  // namespace esbench
