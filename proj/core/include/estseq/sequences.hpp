#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "estseq/dataset.hpp"

namespace estseq {

// How delta_k is tied to (eta_k, gamma_k):
//   linear       delta = eta gamma_k
//   accelerated  delta^2 = eta gamma_k
//   acc_svrg     delta^2 = 5 eta gamma_k / (3n)
enum class Coupling { linear, accelerated, acc_svrg };

class SequenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CouplingStep {
  double delta;
  double gamma;
};

// Solves for (delta_k, gamma_k) from gamma_{k-1} with
// gamma_k = (1 - delta_k) gamma_{k-1} + delta_k mu. Throws SequenceError when
// delta would leave (0, 1).
CouplingStep solve_coupling(Coupling coupling, double mu, double gamma_prev, double eta,
                            std::size_t n = 1);

struct SequenceState {
  Coupling coupling = Coupling::linear;
  double mu = 0.0;
  double gamma0 = 0.0;
  std::size_t n = 1;  // only used by acc_svrg

  std::size_t k = 0;
  double gamma = 0.0;
  double delta = 0.0;
  double Gamma = 1.0;
  double eta = 0.0;
};

SequenceState make_sequence(Coupling coupling, double mu, double gamma0, std::size_t n = 1);

// One step of the recursion with step size eta_k; increments k.
CouplingStep advance(SequenceState& state, double eta);

// Default gamma_0: mu when mu > 0, otherwise 1/eta_0.
double default_gamma0(double mu, double eta0);

// Delta patterns with known products Gamma_k = prod_{t=1..k} (1 - delta_t).
enum class DeltaPattern {
  constant,    // delta
  harmonic,    // 1/(k+1)
  quadratic,   // 2/(k+2)
  harmonic_capped,   // min(1/(k+1), delta)
  quadratic_capped,  // min(2/(k+2), delta)
};

double pattern_delta(DeltaPattern pattern, double delta, std::size_t k);
double gamma_closed_form(DeltaPattern pattern, double delta, std::size_t k);

// Step-size rules.
enum class ScheduleKind {
  constant,             // eta
  sgd_decr,             // min(1/L, 2/(mu(k+2)))
  acc_sgd_decr,         // min(1/L, 4/(mu(k+2)^2))
  svrg_const_adaptive,  // 1/(3L) in experiment mode, 1/(12 L_Q) in theory mode
  svrg_const_mu,        // min(1/(12 L_Q), 1/(5 mu n))
  svrg_decr,            // min(1/(12 L_Q), 1/(5 mu n), 2/(mu(k+2)))
  accsvrg_const,        // min(1/(3 L_Q), 1/(15 mu n))
  accsvrg_decr,         // min(1/(3 L_Q), 1/(15 mu n), 12n/(5 mu (k+2)^2))
};

enum class StepMode { experiment, theory };

std::string_view to_string(ScheduleKind kind);
std::string_view to_string(StepMode mode);
StepMode parse_step_mode(std::string_view text);

struct Schedule {
  ScheduleKind kind = ScheduleKind::constant;
  double eta = 0.0;  // constant kind only
  double L = 0.0;    // smoothness used by the 1/L rules
  double L_Q = 0.0;
  double mu = 0.0;
  std::size_t n = 1;
  StepMode mode = StepMode::experiment;

  // Throws std::invalid_argument for a mu-dependent kind with mu = 0.
  double step_size(std::size_t k) const;
  bool mu_dependent() const;
};

// beta_k = delta_k (1 - delta_k) eta_{k+1} / (eta_k delta_{k+1} + eta_{k+1} delta_k^2).
double extrapolation_beta(double delta_k, double delta_k1, double eta_k, double eta_k1);

// theta_k = (3n delta_k - 5 mu eta_k) / (3 - 5 mu eta_k); requires 5 mu eta_k < 3.
double theta_acc_svrg(double delta_k, double mu, double eta_k, std::size_t n);

enum class AveragingRule { none, online, estimate, uniform };

std::string_view to_string(AveragingRule rule);

// tau_k = min(delta_k, 1/(5n)).
inline double online_tau(double delta_k, std::size_t n) {
  return std::min(delta_k, 1.0 / (5.0 * static_cast<double>(n)));
}

// Weight w of x_k in xhat_k = (1 - w) xhat_{k-1} + w x_k; k >= 1.
double averaging_weight(AveragingRule rule, double delta_k, std::size_t k, std::size_t n);

void average_update(Vec& xhat, const Vec& x_k, double weight);

}  // namespace estseq
