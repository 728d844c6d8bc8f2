#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "estseq/dataset.hpp"
#include "estseq/loss.hpp"
#include "estseq/prox.hpp"
#include "estseq/sampling.hpp"

namespace estseq {

// F(x) = (1/n) sum_i phi(b_i a_i^T x) + (lambda/2)||x||^2 + psi(x).
// The ridge term belongs to the smooth part f; psi is the nonsmooth part.
struct Problem {
  std::shared_ptr<const Dataset> data;
  Loss loss = Loss::logistic;
  double lambda = 0.0;
  Regularizer psi;
  NoiseModel noise;

  Problem() = default;
  Problem(std::shared_ptr<const Dataset> data, Loss loss, double lambda,
          Regularizer psi = Regularizer::zero(), NoiseModel noise = NoiseModel::none());

  std::size_t n() const { return data->rows(); }
  std::int64_t p() const { return data->dim(); }
  double mu() const { return lambda; }
};

struct GradReport {
  Vec gradient;
  std::optional<double> value;
  bool perturbation_applied = false;
};

// Scalar part of a (possibly perturbed) component gradient: the perturbed
// gradient is deriv * b_i * a~_i + lambda x + zeta, where a~_i is the masked
// row under DropOut and zeta the additive noise under the gaussian model.
struct ComponentEval {
  double value;  // phi(b_i a~_i^T x)
  double deriv;  // phi'(b_i a~_i^T x)
};

// True when the perturbation with this seed actually changes something.
inline bool perturbs(const Problem& problem, std::optional<std::uint64_t> seed) {
  return seed.has_value() && problem.noise.active();
}

ComponentEval component_eval(const Problem& problem, std::size_t i, const Vec& x,
                             std::optional<std::uint64_t> seed = std::nullopt);

// out += scale * grad~ f_i(x). The perturbation is applied when a seed is
// given and the problem's noise model is active.
void accumulate_component_grad(const Problem& problem, std::size_t i, const Vec& x,
                               std::optional<std::uint64_t> seed, double scale, Vec& out);

// out += scale * (deriv * b_i * a~_i + zeta), the data part of a component
// gradient with a known scalar derivative. Used by the compact table storage.
void accumulate_data_term(const Problem& problem, std::size_t i, double deriv,
                          std::optional<std::uint64_t> seed, double scale, Vec& out);

// Throws std::out_of_range for i >= n.
GradReport component_grad(const Problem& problem, std::size_t i, const Vec& x,
                          std::optional<std::uint64_t> seed = std::nullopt);

// (1/n) sum_i grad~ f_i(x). With seeds.size() == n, component i uses seeds[i];
// an empty span gives the unperturbed gradient.
GradReport full_grad(const Problem& problem, const Vec& x,
                     std::span<const std::uint64_t> seeds = {});

// Unperturbed F(x), psi included.
double full_objective(const Problem& problem, const Vec& x);
// Smooth part only, without psi.
double smooth_objective(const Problem& problem, const Vec& x);

// Objective under DropOut estimated with a fixed mask set: mask_seeds holds
// per_point seeds for each component, laid out row-major by component. Other
// noise models leave f unchanged, and the call reduces to full_objective.
double expected_objective(const Problem& problem, const Vec& x,
                          std::span<const std::uint64_t> mask_seeds, std::size_t per_point);

struct Smoothness {
  std::vector<double> L;
  double L_max = 0.0;
  double L_mean = 0.0;
  double mu = 0.0;
};

// L_i = c_loss ||a_i||^2 + lambda, mu = lambda.
Smoothness smoothness(const Problem& problem);

// The Fenchel gap needs lambda > 0, psi = 0 and an unperturbed f (gaussian
// gradient noise leaves f unchanged, DropOut does not).
bool gap_available(const Problem& problem);

// F(x) - D(alpha) with alpha_i = -phi'(b_i a_i^T x). Throws
// std::invalid_argument when !gap_available(problem).
double duality_gap(const Problem& problem, const Vec& x);
double dual_objective(const Problem& problem, const Vec& x);

}  // namespace estseq
