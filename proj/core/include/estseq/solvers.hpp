#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "estseq/estimators.hpp"
#include "estseq/objective.hpp"
#include "estseq/sequences.hpp"

namespace estseq {

// A: proximal step at x_{k-1}.
// B: dual-averaging-like step on xbar, x_k = prox_{psi/gamma_k}(xbar_k).
// C: proximal step at the extrapolated point y_{k-1}.
// acc_svrg: accelerated random-SVRG with the (theta, v) coupling.
enum class Variant { A, B, C, acc_svrg };

std::string_view to_string(Variant variant);
Coupling coupling_for(Variant variant);
// Throws std::invalid_argument for pairs outside the compatibility matrix.
void check_compatible(Variant variant, EstimatorKind estimator);

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IterateState {
  Vec x;
  Vec x_prev;
  Vec xbar;  // B
  Vec y;     // C, acc_svrg
  Vec v;     // C (diagnostic), acc_svrg
  Vec xhat;  // averaged iterate
  std::size_t k = 0;
};

// Drives one run: owns the estimator, sequence and random streams.
class Solver {
 public:
  Solver(const Problem& problem, Variant variant, std::unique_ptr<Estimator> estimator,
         Schedule schedule, std::uint64_t seed, AveragingRule averaging = AveragingRule::none,
         std::optional<double> gamma0 = std::nullopt);

  // Sets all iterates to x0 and initializes the estimator at x0.
  void init(const Vec& x0);
  // One iteration with eta_k from the schedule, dispatched on the variant.
  void step();

  // Single iterations with an explicit step size. Each advances the sequence,
  // queries the estimator and performs its post-step update.
  void step_A(double eta);
  void step_B(double eta);
  void step_C(double eta);
  void step_acc_svrg(double eta);

  // Restart with a new schedule: k = 0 and a fresh sequence; iterates, tables
  // and xhat are carried over. The SVRG anchor is refreshed at x (charged n).
  void restart(Schedule schedule);

  const IterateState& state() const { return state_; }
  IterateState& mutable_state() { return state_; }
  Estimator& estimator() { return *estimator_; }
  const Estimator& estimator() const { return *estimator_; }
  const SequenceState& sequence() const { return seq_; }
  const Schedule& schedule() const { return schedule_; }
  RunStreams& streams() { return streams_; }
  Variant variant() const { return variant_; }

  double last_eta() const { return last_eta_; }
  double last_beta() const { return last_beta_; }
  double last_theta() const { return last_theta_; }

  double passes() const;

 private:
  void reset_sequence();
  void apply_averaging();
  void check_finite() const;

  const Problem& problem_;
  Variant variant_;
  std::unique_ptr<Estimator> estimator_;
  Schedule schedule_;
  RunStreams streams_;
  AveragingRule averaging_;
  std::optional<double> gamma0_override_;
  SequenceState seq_;
  IterateState state_;
  double x0_norm_ = 0.0;
  double last_eta_ = 0.0;
  double last_beta_ = 0.0;
  double last_theta_ = 0.0;
};

struct RunConfig {
  std::string label;
  Variant variant = Variant::A;
  EstimatorKind estimator = EstimatorKind::svrg;
  EstimatorOptions estimator_options;
  SamplingMode sampling = SamplingMode::uniform;
  StepMode mode = StepMode::experiment;

  // Stage 1 (or the only stage) and the optional decreasing stage 2.
  ScheduleKind schedule = ScheduleKind::svrg_const_adaptive;
  double constant_eta = 0.0;  // for ScheduleKind::constant; 0 means 1/L_Q
  std::optional<ScheduleKind> stage2;
  // Stage-1 budget in passes. Negative: switch when the plateau detector
  // fires, but no later than half of max_passes.
  double stage1_passes = -1.0;

  AveragingRule averaging = AveragingRule::none;
  std::optional<double> gamma0;
  std::uint64_t seed = 0;
  double max_passes = 100.0;
  double eval_every = 1.0;
  std::optional<Vec> x0;

  // Objective used for the trace; defaults to full_objective.
  std::function<double(const Vec&)> evaluate;
  bool compute_gap = true;
  // Stop once the evaluated objective is at or below this value.
  std::optional<double> stop_below;
};

struct TraceRow {
  double pass = 0.0;
  std::uint64_t iteration = 0;
  double objective = 0.0;
  double objective_avg = 0.0;
  double gap = 0.0;  // NaN when unavailable
  double wall_seconds = 0.0;
};

struct RunTrace {
  std::string label;
  std::vector<TraceRow> rows;
  bool diverged = false;
  std::string message;
  double stage1_end_pass = -1.0;
  Vec x_final;
  Vec xhat_final;
};

// Relative change of the objective below tol over the last `window`
// evaluations.
bool plateau_detected(std::span<const TraceRow> rows, std::size_t window = 10,
                      double tol = 1e-3);

// Builds the schedule of a kind with the problem's constants.
Schedule make_schedule(ScheduleKind kind, const Problem& problem, const SamplingDist& dist,
                       StepMode mode, double constant_eta = 0.0);

RunTrace run(const RunConfig& config, const Problem& problem);

// Named algorithm presets: the stochastic methods with their step-size rules,
// plus deterministic and table-based extras.
std::vector<std::string> algorithm_names();
bool is_algorithm(std::string_view name);
// Throws std::invalid_argument listing the valid names.
RunConfig algorithm_config(std::string_view name, const Problem& problem, StepMode mode);

}  // namespace estseq
