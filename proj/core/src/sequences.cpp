#include "estseq/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace estseq {

namespace {

// Positive root of d^2 + b d - c = 0 for c > 0, without cancellation.
double positive_root(double b, double c) {
  const double s = std::sqrt(b * b + 4.0 * c);
  return b >= 0.0 ? 2.0 * c / (b + s) : 0.5 * (s - b);
}

}  // namespace

CouplingStep solve_coupling(Coupling coupling, double mu, double gamma_prev, double eta,
                            std::size_t n) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw SequenceError("step size must be positive");
  if (!(gamma_prev > 0.0)) throw SequenceError("gamma must be positive");
  double delta = 0.0;
  switch (coupling) {
    case Coupling::linear:
      delta = eta * gamma_prev / (1.0 + eta * (gamma_prev - mu));
      break;
    case Coupling::accelerated:
      delta = positive_root(eta * (gamma_prev - mu), eta * gamma_prev);
      break;
    case Coupling::acc_svrg: {
      const double a = 5.0 * eta / (3.0 * static_cast<double>(n));
      delta = positive_root(a * (gamma_prev - mu), a * gamma_prev);
      break;
    }
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    std::ostringstream os;
    os << "no coupling root in (0, 1): delta = " << delta << " for eta = " << eta
       << ", gamma = " << gamma_prev << " (step too large)";
    throw SequenceError(os.str());
  }
  return {delta, (1.0 - delta) * gamma_prev + delta * mu};
}

SequenceState make_sequence(Coupling coupling, double mu, double gamma0, std::size_t n) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(gamma0 >= mu) || !(gamma0 > 0.0))
    throw std::invalid_argument("gamma0 must be positive and at least mu");
  SequenceState s;
  s.coupling = coupling;
  s.mu = mu;
  s.gamma0 = gamma0;
  s.gamma = gamma0;
  s.n = std::max<std::size_t>(n, 1);
  return s;
}

CouplingStep advance(SequenceState& state, double eta) {
  const auto step = solve_coupling(state.coupling, state.mu, state.gamma, eta, state.n);
  state.delta = step.delta;
  state.gamma = step.gamma;
  state.Gamma *= 1.0 - step.delta;
  state.eta = eta;
  ++state.k;
  return step;
}

double default_gamma0(double mu, double eta0) { return mu > 0.0 ? mu : 1.0 / eta0; }

double pattern_delta(DeltaPattern pattern, double delta, std::size_t k) {
  const double kk = static_cast<double>(k);
  switch (pattern) {
    case DeltaPattern::constant: return delta;
    case DeltaPattern::harmonic: return 1.0 / (kk + 1.0);
    case DeltaPattern::quadratic: return 2.0 / (kk + 2.0);
    case DeltaPattern::harmonic_capped: return std::min(1.0 / (kk + 1.0), delta);
    case DeltaPattern::quadratic_capped: return std::min(2.0 / (kk + 2.0), delta);
  }
  return delta;
}

double gamma_closed_form(DeltaPattern pattern, double delta, std::size_t k) {
  const double kk = static_cast<double>(k);
  switch (pattern) {
    case DeltaPattern::constant:
      return std::pow(1.0 - delta, kk);
    case DeltaPattern::harmonic:
      return 1.0 / (kk + 1.0);
    case DeltaPattern::quadratic:
      return 2.0 / ((kk + 1.0) * (kk + 2.0));
    case DeltaPattern::harmonic_capped: {
      // delta_t = delta for t < k0, then 1/(t+1).
      std::size_t k0 = static_cast<std::size_t>(std::ceil(1.0 / delta - 1.0));
      while (k0 > 1 && 1.0 / static_cast<double>(k0) <= delta) --k0;
      while (1.0 / (static_cast<double>(k0) + 1.0) > delta) ++k0;
      k0 = std::max<std::size_t>(k0, 1);
      if (k < k0) return std::pow(1.0 - delta, kk);
      const double head = std::pow(1.0 - delta, static_cast<double>(k0 - 1));
      return head * static_cast<double>(k0) / (kk + 1.0);
    }
    case DeltaPattern::quadratic_capped: {
      std::size_t k0 = static_cast<std::size_t>(std::ceil(2.0 / delta - 2.0));
      while (k0 > 1 && 2.0 / (static_cast<double>(k0) + 1.0) <= delta) --k0;
      while (2.0 / (static_cast<double>(k0) + 2.0) > delta) ++k0;
      k0 = std::max<std::size_t>(k0, 1);
      if (k < k0) return std::pow(1.0 - delta, kk);
      const double head = std::pow(1.0 - delta, static_cast<double>(k0 - 1));
      const double a = static_cast<double>(k0);
      return head * a * (a + 1.0) / ((kk + 1.0) * (kk + 2.0));
    }
  }
  return 0.0;
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::sgd_decr: return "sgd_decr";
    case ScheduleKind::acc_sgd_decr: return "acc_sgd_decr";
    case ScheduleKind::svrg_const_adaptive: return "svrg_const_adaptive";
    case ScheduleKind::svrg_const_mu: return "svrg_const_mu";
    case ScheduleKind::svrg_decr: return "svrg_decr";
    case ScheduleKind::accsvrg_const: return "accsvrg_const";
    case ScheduleKind::accsvrg_decr: return "accsvrg_decr";
  }
  return "?";
}

std::string_view to_string(StepMode mode) {
  return mode == StepMode::theory ? "theory" : "experiment";
}

StepMode parse_step_mode(std::string_view text) {
  if (text == "theory") return StepMode::theory;
  if (text == "experiment") return StepMode::experiment;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "' (expected theory or experiment)");
}

bool Schedule::mu_dependent() const {
  switch (kind) {
    case ScheduleKind::sgd_decr:
    case ScheduleKind::acc_sgd_decr:
    case ScheduleKind::svrg_const_mu:
    case ScheduleKind::svrg_decr:
    case ScheduleKind::accsvrg_decr:
      return true;
    default:
      return false;
  }
}

double Schedule::step_size(std::size_t k) const {
  if (mu_dependent() && !(mu > 0.0))
    throw std::invalid_argument(std::string("schedule ") + std::string(to_string(kind)) +
                                " needs mu > 0");
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case ScheduleKind::constant:
      return eta;
    case ScheduleKind::sgd_decr:
      return std::min(1.0 / L, 2.0 / (mu * (kk + 2.0)));
    case ScheduleKind::acc_sgd_decr:
      return std::min(1.0 / L, 4.0 / (mu * (kk + 2.0) * (kk + 2.0)));
    case ScheduleKind::svrg_const_adaptive:
      return mode == StepMode::theory ? 1.0 / (12.0 * L_Q) : 1.0 / (3.0 * L);
    case ScheduleKind::svrg_const_mu:
      return std::min(1.0 / (12.0 * L_Q), 1.0 / (5.0 * mu * nn));
    case ScheduleKind::svrg_decr:
      return std::min({1.0 / (12.0 * L_Q), 1.0 / (5.0 * mu * nn), 2.0 / (mu * (kk + 2.0))});
    case ScheduleKind::accsvrg_const:
      return std::min(1.0 / (3.0 * L_Q), mu > 0.0 ? 1.0 / (15.0 * mu * nn) : inf);
    case ScheduleKind::accsvrg_decr:
      return std::min({1.0 / (3.0 * L_Q), 1.0 / (15.0 * mu * nn),
                       12.0 * nn / (5.0 * mu * (kk + 2.0) * (kk + 2.0))});
  }
  return eta;
}

double extrapolation_beta(double delta_k, double delta_k1, double eta_k, double eta_k1) {
  return delta_k * (1.0 - delta_k) * eta_k1 / (eta_k * delta_k1 + eta_k1 * delta_k * delta_k);
}

double theta_acc_svrg(double delta_k, double mu, double eta_k, std::size_t n) {
  const double m = 5.0 * mu * eta_k;
  if (!(m < 3.0)) throw std::invalid_argument("theta needs 5 mu eta < 3");
  return (3.0 * static_cast<double>(n) * delta_k - m) / (3.0 - m);
}

std::string_view to_string(AveragingRule rule) {
  switch (rule) {
    case AveragingRule::none: return "none";
    case AveragingRule::online: return "online";
    case AveragingRule::estimate: return "estimate";
    case AveragingRule::uniform: return "uniform";
  }
  return "?";
}

double averaging_weight(AveragingRule rule, double delta_k, std::size_t k, std::size_t n) {
  switch (rule) {
    case AveragingRule::none: return 1.0;
    case AveragingRule::online: return online_tau(delta_k, n);
    case AveragingRule::estimate: return delta_k;
    case AveragingRule::uniform: return 1.0 / static_cast<double>(std::max<std::size_t>(k, 1));
  }
  return 1.0;
}

void average_update(Vec& xhat, const Vec& x_k, double weight) {
  if (weight == 1.0) {
    xhat = x_k;
    return;
  }
  xhat = (1.0 - weight) * xhat + weight * x_k;
}

}  // namespace estseq
