#include "estseq/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace estseq {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::A: return "A";
    case Variant::B: return "B";
    case Variant::C: return "C";
    case Variant::acc_svrg: return "acc_svrg";
  }
  return "?";
}

Coupling coupling_for(Variant variant) {
  switch (variant) {
    case Variant::A:
    case Variant::B: return Coupling::linear;
    case Variant::C: return Coupling::accelerated;
    case Variant::acc_svrg: return Coupling::acc_svrg;
  }
  return Coupling::linear;
}

void check_compatible(Variant variant, EstimatorKind estimator) {
  bool ok = true;
  if (variant == Variant::C)
    ok = estimator == EstimatorKind::exact || estimator == EstimatorKind::sgd;
  else if (variant == Variant::acc_svrg)
    ok = estimator == EstimatorKind::svrg;
  if (!ok)
    throw std::invalid_argument("variant " + std::string(to_string(variant)) +
                                " does not accept the " + std::string(to_string(estimator)) +
                                " estimator");
}

// ---------------------------------------------------------------- Solver

Solver::Solver(const Problem& problem, Variant variant, std::unique_ptr<Estimator> estimator,
               Schedule schedule, std::uint64_t seed, AveragingRule averaging,
               std::optional<double> gamma0)
    : problem_(problem),
      variant_(variant),
      estimator_(std::move(estimator)),
      schedule_(schedule),
      streams_(seed),
      averaging_(averaging),
      gamma0_override_(gamma0) {
  if (!estimator_) throw std::invalid_argument("solver needs an estimator");
  check_compatible(variant_, estimator_->kind());
}

void Solver::reset_sequence() {
  const double mu = problem_.mu();
  double gamma0 = 0.0;
  if (gamma0_override_) {
    gamma0 = *gamma0_override_;
  } else {
    const double eta1 = schedule_.step_size(1);
    gamma0 = default_gamma0(mu, eta1);
    // The accelerated SVRG coupling needs eta_k <= 1/(15 gamma_k n); with mu = 0 the default 1/eta
    // violates it at k = 1.
    if (variant_ == Variant::acc_svrg && mu == 0.0)
      gamma0 = 1.0 / (15.0 * eta1 * static_cast<double>(problem_.n()));
  }
  seq_ = make_sequence(coupling_for(variant_), mu, gamma0, problem_.n());
}

void Solver::init(const Vec& x0) {
  if (x0.size() != problem_.p()) throw std::invalid_argument("x0 has the wrong dimension");
  state_ = IterateState{x0, x0, x0, x0, x0, x0, 0};
  x0_norm_ = x0.norm();
  reset_sequence();
  estimator_->init(x0, streams_);
}

void Solver::restart(Schedule schedule) {
  schedule_ = schedule;
  reset_sequence();
  state_.x_prev = state_.x;
  state_.y = state_.x;
  state_.v = state_.x;
  if (auto* svrg = dynamic_cast<SvrgEstimator*>(estimator_.get())) {
    svrg->force_refresh(state_.x, streams_);
    svrg->charge(problem_.n());
  }
}

double Solver::passes() const {
  return static_cast<double>(estimator_->evaluations()) / static_cast<double>(problem_.n());
}

void Solver::step() {
  const double eta = schedule_.step_size(seq_.k + 1);
  switch (variant_) {
    case Variant::A: step_A(eta); break;
    case Variant::B: step_B(eta); break;
    case Variant::C: step_C(eta); break;
    case Variant::acc_svrg: step_acc_svrg(eta); break;
  }
}

void Solver::step_A(double eta) {
  // Iteration (A) only reads the sequence for averaging, so a step that
  // leaves no root in (0, 1) (e.g. eta = 1/mu) is fine without it.
  try {
    advance(seq_, eta);
  } catch (const SequenceError&) {
    if (averaging_ != AveragingRule::none) throw;
    ++seq_.k;
    seq_.eta = eta;
  }
  last_eta_ = eta;
  state_.x_prev = state_.x;
  const Vec& g = estimator_->estimate(state_.x_prev, streams_);
  state_.x = state_.x_prev - eta * g;
  prox_inplace(problem_.psi, eta, state_.x);
  estimator_->post_step(state_.x_prev, state_.x, streams_);
  ++state_.k;
  apply_averaging();
  check_finite();
}

void Solver::step_B(double eta) {
  advance(seq_, eta);
  last_eta_ = eta;
  const double mu_eta = problem_.mu() * eta;
  state_.x_prev = state_.x;
  const Vec& g = estimator_->estimate(state_.x_prev, streams_);
  state_.xbar = (1.0 - mu_eta) * state_.xbar + mu_eta * state_.x_prev - eta * g;
  state_.x = state_.xbar;
  prox_inplace(problem_.psi, 1.0 / seq_.gamma, state_.x);
  estimator_->post_step(state_.x_prev, state_.x, streams_);
  ++state_.k;
  apply_averaging();
  check_finite();
}

void Solver::step_C(double eta) {
  advance(seq_, eta);
  last_eta_ = eta;
  const double delta = seq_.delta;
  // beta_k needs (eta_{k+1}, delta_{k+1}); solving ahead does not mutate seq_.
  const double eta_next = schedule_.step_size(seq_.k + 1);
  const auto next = solve_coupling(seq_.coupling, seq_.mu, seq_.gamma, eta_next, seq_.n);

  state_.x_prev = state_.x;
  const Vec& g = estimator_->estimate(state_.y, streams_);
  state_.x = state_.y - eta * g;
  prox_inplace(problem_.psi, eta, state_.x);
  estimator_->post_step(state_.y, state_.x, streams_);

  last_beta_ = extrapolation_beta(delta, next.delta, eta, eta_next);
  state_.v = state_.x_prev + (state_.x - state_.x_prev) / delta;
  state_.y = state_.x + last_beta_ * (state_.x - state_.x_prev);
  ++state_.k;
  apply_averaging();
  check_finite();
}

void Solver::step_acc_svrg(double eta) {
  auto* svrg = dynamic_cast<SvrgEstimator*>(estimator_.get());
  if (!svrg) throw std::logic_error("the accelerated SVRG iteration needs the SVRG estimator");
  const double n = static_cast<double>(problem_.n());
  const double mu = problem_.mu();

  const auto trial = solve_coupling(Coupling::acc_svrg, mu, seq_.gamma, eta, seq_.n);
  const double cap = std::min(1.0 / (3.0 * estimator_->distribution().L_Q()),
                              1.0 / (15.0 * trial.gamma * n));
  if (eta > cap * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "step " << eta << " exceeds the accelerated SVRG cap " << cap;
    throw std::invalid_argument(os.str());
  }
  advance(seq_, eta);
  last_eta_ = eta;
  const double delta = seq_.delta;
  const double gamma = seq_.gamma;

  last_theta_ = theta_acc_svrg(delta, mu, eta, problem_.n());
  state_.y = last_theta_ * state_.v + (1.0 - last_theta_) * svrg->anchor();
  state_.x_prev = state_.x;
  const Vec& g = estimator_->estimate(state_.y, streams_);
  state_.x = state_.y - eta * g;
  prox_inplace(problem_.psi, eta, state_.x);

  const double c = mu * delta / gamma;
  state_.v = (1.0 - c) * state_.v + c * state_.y + (delta / (gamma * eta)) * (state_.x - state_.y);
  // Refreshes the anchor at x_k with probability 1/n.
  estimator_->post_step(state_.y, state_.x, streams_);
  ++state_.k;
  apply_averaging();
  check_finite();
}

void Solver::apply_averaging() {
  const double w = averaging_weight(averaging_, seq_.delta, seq_.k, problem_.n());
  average_update(state_.xhat, state_.x, w);
}

void Solver::check_finite() const {
  const double norm = state_.x.norm();
  if (!std::isfinite(norm) || norm > 1e8 * (1.0 + x0_norm_)) {
    std::ostringstream os;
    os << "iterate diverged at k = " << state_.k << " (norm " << norm << ")";
    throw DivergenceError(os.str());
  }
}

// ---------------------------------------------------------------- run

bool plateau_detected(std::span<const TraceRow> rows, std::size_t window, double tol) {
  if (rows.size() <= window) return false;
  const double now = rows.back().objective;
  const double then = rows[rows.size() - 1 - window].objective;
  return std::abs(then - now) <= tol * std::max(std::abs(then), 1e-300);
}

Schedule make_schedule(ScheduleKind kind, const Problem& problem, const SamplingDist& dist,
                       StepMode mode, double constant_eta) {
  Schedule s;
  s.kind = kind;
  s.L_Q = dist.L_Q();
  // The 1/L rules use L_Q, which is max_i L_i under uniform sampling and keeps
  // importance-weighted steps stable otherwise.
  s.L = dist.L_Q();
  s.mu = problem.mu();
  s.n = problem.n();
  s.mode = mode;
  s.eta = constant_eta > 0.0 ? constant_eta : 1.0 / s.L;
  if (s.mu_dependent() && !(s.mu > 0.0))
    throw std::invalid_argument("schedule " + std::string(to_string(kind)) +
                                " needs mu = lambda > 0");
  return s;
}

namespace {

std::uint64_t natural_block_passes(EstimatorKind kind) {
  return kind == EstimatorKind::svrg || kind == EstimatorKind::saga_nonuniform ? 2 : 1;
}

}  // namespace

RunTrace run(const RunConfig& config, const Problem& problem) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const std::size_t n = problem.n();
  const auto smooth = smoothness(problem);
  auto dist = make_distribution(config.sampling, smooth.L);
  check_compatible(config.variant, config.estimator);

  const Schedule stage1 =
      make_schedule(config.schedule, problem, dist, config.mode, config.constant_eta);
  std::optional<Schedule> stage2;
  if (config.stage2)
    stage2 = make_schedule(*config.stage2, problem, dist, config.mode, config.constant_eta);

  Solver solver(problem, config.variant,
                make_estimator(config.estimator, problem, dist, config.estimator_options), stage1,
                config.seed, config.averaging, config.gamma0);
  const Vec x0 = config.x0 ? *config.x0 : Vec::Zero(problem.p());
  solver.init(x0);

  const auto evaluate = config.evaluate
                            ? config.evaluate
                            : std::function<double(const Vec&)>(
                                  [&problem](const Vec& x) { return full_objective(problem, x); });
  const bool gap_on = config.compute_gap && gap_available(problem);

  RunTrace trace;
  trace.label = config.label;
  auto record = [&]() {
    const auto& st = solver.state();
    TraceRow row;
    row.pass = solver.passes();
    row.iteration = st.k;
    row.objective = evaluate(st.x);
    row.objective_avg = config.averaging == AveragingRule::none ? row.objective : evaluate(st.xhat);
    row.gap = gap_on ? duality_gap(problem, st.x) : std::numeric_limits<double>::quiet_NaN();
    row.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    trace.rows.push_back(row);
  };

  const auto units = [&]() { return solver.estimator().evaluations(); };
  const auto budget = static_cast<std::uint64_t>(std::llround(config.max_passes * n));
  const double cadence =
      std::max(config.eval_every, static_cast<double>(natural_block_passes(config.estimator)));
  const auto cadence_units =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(cadence * n)));
  const bool auto_stage = config.stage1_passes < 0.0;
  const auto stage1_units = static_cast<std::uint64_t>(
      std::llround((auto_stage ? 0.5 * config.max_passes : config.stage1_passes) * n));

  bool in_stage2 = false;
  std::size_t stage_first_row = 0;
  auto maybe_switch = [&]() {
    if (!stage2 || in_stage2) return;
    const bool budget_hit = units() >= stage1_units;
    const bool plateau =
        auto_stage && plateau_detected(std::span(trace.rows).subspan(stage_first_row));
    if (budget_hit || plateau) {
      solver.restart(*stage2);
      in_stage2 = true;
      trace.stage1_end_pass = solver.passes();
      stage_first_row = trace.rows.size();
    }
  };

  record();
  maybe_switch();
  std::uint64_t next_eval = cadence_units;
  try {
    while (units() < budget) {
      solver.step();
      if (units() >= next_eval || units() >= budget) {
        while (next_eval <= units()) next_eval += cadence_units;
        record();
        if (config.stop_below && trace.rows.back().objective <= *config.stop_below) break;
      }
      maybe_switch();
    }
  } catch (const DivergenceError& e) {
    trace.diverged = true;
    trace.message = e.what();
  } catch (const SequenceError& e) {
    trace.diverged = true;
    trace.message = e.what();
  }
  if (trace.diverged) {
    TraceRow row;
    row.pass = std::max(solver.passes(), trace.rows.back().pass + 1e-9);
    row.iteration = solver.state().k;
    row.objective = row.objective_avg = std::numeric_limits<double>::quiet_NaN();
    row.gap = std::numeric_limits<double>::quiet_NaN();
    row.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    trace.rows.push_back(row);
  }
  trace.x_final = solver.state().x;
  trace.xhat_final = solver.state().xhat;
  return trace;
}

// ---------------------------------------------------------------- presets

namespace {

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "SGD",        "SGD-d",       "acc-SGD", "acc-SGD-d", "acc-mb-SGD-d", "rand-SVRG",
      "rand-SVRG-d", "acc-SVRG",   "acc-SVRG-d", "GD",     "acc-GD",       "SAGA",
      "SAGA-nu",    "MISO"};
  return names;
}

}  // namespace

std::vector<std::string> algorithm_names() { return preset_names(); }

bool is_algorithm(std::string_view name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

RunConfig algorithm_config(std::string_view name, const Problem& problem, StepMode mode) {
  RunConfig c;
  c.label = std::string(name);
  c.mode = mode;
  const bool theory = mode == StepMode::theory;

  if (name == "SGD" || name == "SGD-d") {
    c.variant = Variant::A;
    c.estimator = EstimatorKind::sgd;
    c.schedule = ScheduleKind::constant;
    if (name == "SGD-d") c.stage2 = ScheduleKind::sgd_decr;
  } else if (name == "acc-SGD" || name == "acc-SGD-d" || name == "acc-mb-SGD-d") {
    c.variant = Variant::C;
    c.estimator = EstimatorKind::sgd;
    c.schedule = ScheduleKind::constant;
    if (name != "acc-SGD") c.stage2 = ScheduleKind::acc_sgd_decr;
    if (name == "acc-mb-SGD-d") {
      if (!(problem.mu() > 0.0)) throw std::invalid_argument("acc-mb-SGD-d needs lambda > 0");
      const double L = smoothness(problem).L_max;
      c.estimator_options.batch =
          static_cast<std::size_t>(std::ceil(std::sqrt(L / problem.mu())));
    }
  } else if (name == "rand-SVRG" || name == "rand-SVRG-d") {
    c.variant = Variant::A;
    c.estimator = EstimatorKind::svrg;
    if (name == "rand-SVRG") {
      c.schedule = ScheduleKind::svrg_const_adaptive;
    } else {
      c.schedule = ScheduleKind::svrg_const_mu;
      c.stage2 = ScheduleKind::svrg_decr;
    }
    if (theory) c.averaging = AveragingRule::online;
  } else if (name == "acc-SVRG" || name == "acc-SVRG-d") {
    c.variant = Variant::acc_svrg;
    c.estimator = EstimatorKind::svrg;
    c.schedule = ScheduleKind::accsvrg_const;
    if (name == "acc-SVRG-d") c.stage2 = ScheduleKind::accsvrg_decr;
  } else if (name == "GD" || name == "acc-GD") {
    c.variant = name == "GD" ? Variant::A : Variant::C;
    c.estimator = EstimatorKind::exact;
    c.schedule = ScheduleKind::constant;
  } else if (name == "SAGA" || name == "SAGA-nu") {
    c.variant = Variant::A;
    c.estimator = name == "SAGA" ? EstimatorKind::saga_uniform : EstimatorKind::saga_nonuniform;
    if (name == "SAGA-nu") c.sampling = SamplingMode::lipschitz;
    c.schedule = ScheduleKind::svrg_const_adaptive;
  } else if (name == "MISO") {
    c.variant = Variant::B;
    c.estimator = EstimatorKind::saga_uniform;
    c.estimator_options.saga.beta = problem.mu();
    c.schedule = ScheduleKind::svrg_const_mu;
  } else {
    std::ostringstream os;
    os << "unknown algorithm '" << name << "'; valid names:";
    for (const auto& n : preset_names()) os << ' ' << n;
    throw std::invalid_argument(os.str());
  }
  return c;
}

}  // namespace estseq
