#include "estseq/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace estseq {

Problem::Problem(std::shared_ptr<const Dataset> data_, Loss loss_, double lambda_,
                 Regularizer psi_, NoiseModel noise_)
    : data(std::move(data_)), loss(loss_), lambda(lambda_), psi(psi_), noise(noise_) {
  if (!data) throw std::invalid_argument("problem needs a dataset");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and non-negative");
}

namespace {

void check_index(const Problem& problem, std::size_t i) {
  if (i >= problem.n())
    throw std::out_of_range("component index " + std::to_string(i) + " out of range (n = " +
                            std::to_string(problem.n()) + ")");
}

bool dropout_on(const Problem& problem, std::optional<std::uint64_t> seed) {
  return perturbs(problem, seed) && problem.noise.kind == NoiseModel::Kind::dropout;
}

bool gaussian_on(const Problem& problem, std::optional<std::uint64_t> seed) {
  return perturbs(problem, seed) && problem.noise.kind == NoiseModel::Kind::gaussian;
}

// Dot product of the masked row with x. The mask stream is consumed in storage
// order, exactly as perturb() does, and the kept flags are written to `keep`.
double masked_dot(SparseRowView row, const Vec& x, double delta, std::uint64_t seed,
                  std::vector<char>& keep) {
  DropoutMask mask(delta, seed);
  keep.resize(row.nnz());
  double acc = 0.0;
  for (std::size_t k = 0; k < row.nnz(); ++k) {
    keep[k] = mask.keep();
    if (keep[k]) acc += row.values[k] * x[row.indices[k]];
  }
  return acc;
}

void masked_axpy(SparseRowView row, const std::vector<char>& keep, double scale, Vec& out) {
  for (std::size_t k = 0; k < row.nnz(); ++k)
    if (keep[k]) out[row.indices[k]] += scale * row.values[k];
}

thread_local std::vector<char> keep_buffer;

}  // namespace

ComponentEval component_eval(const Problem& problem, std::size_t i, const Vec& x,
                             std::optional<std::uint64_t> seed) {
  check_index(problem, i);
  const auto row = problem.data->row(i);
  const double b = problem.data->label(i);
  const double dot = dropout_on(problem, seed)
                         ? masked_dot(row, x, problem.noise.param, *seed, keep_buffer)
                         : row.dot(x);
  const auto e = loss_value_deriv(problem.loss, b * dot);
  return {e.value, e.deriv};
}

void accumulate_data_term(const Problem& problem, std::size_t i, double deriv,
                          std::optional<std::uint64_t> seed, double scale, Vec& out) {
  const auto row = problem.data->row(i);
  const double b = problem.data->label(i);
  if (dropout_on(problem, seed)) {
    DropoutMask mask(problem.noise.param, *seed);
    for (std::size_t k = 0; k < row.nnz(); ++k)
      if (mask.keep()) out[row.indices[k]] += scale * deriv * b * row.values[k];
  } else if (deriv != 0.0) {
    row.axpy(scale * deriv * b, out);
  }
  if (gaussian_on(problem, seed)) add_gaussian_noise(problem.noise.param, *seed, scale, out);
}

void accumulate_component_grad(const Problem& problem, std::size_t i, const Vec& x,
                               std::optional<std::uint64_t> seed, double scale, Vec& out) {
  check_index(problem, i);
  const auto row = problem.data->row(i);
  const double b = problem.data->label(i);
  if (dropout_on(problem, seed)) {
    const double dot = masked_dot(row, x, problem.noise.param, *seed, keep_buffer);
    const double d = loss_deriv(problem.loss, b * dot);
    if (d != 0.0) masked_axpy(row, keep_buffer, scale * d * b, out);
  } else {
    const double d = loss_deriv(problem.loss, b * row.dot(x));
    if (d != 0.0) row.axpy(scale * d * b, out);
  }
  if (problem.lambda != 0.0) out += (scale * problem.lambda) * x;
  if (gaussian_on(problem, seed)) add_gaussian_noise(problem.noise.param, *seed, scale, out);
}

GradReport component_grad(const Problem& problem, std::size_t i, const Vec& x,
                          std::optional<std::uint64_t> seed) {
  check_index(problem, i);
  GradReport report;
  report.gradient = Vec::Zero(problem.p());
  const auto e = component_eval(problem, i, x, seed);
  accumulate_data_term(problem, i, e.deriv, seed, 1.0, report.gradient);
  if (problem.lambda != 0.0) report.gradient += problem.lambda * x;
  report.value = e.value + 0.5 * problem.lambda * x.squaredNorm();
  report.perturbation_applied = perturbs(problem, seed);
  return report;
}

GradReport full_grad(const Problem& problem, const Vec& x, std::span<const std::uint64_t> seeds) {
  const std::size_t n = problem.n();
  if (!seeds.empty() && seeds.size() != n)
    throw std::invalid_argument("full_grad: expected one seed per component");
  GradReport report;
  Vec sum = Vec::Zero(problem.p());
  for (std::size_t i = 0; i < n; ++i) {
    const auto seed = seeds.empty() ? std::nullopt : std::optional<std::uint64_t>(seeds[i]);
    const auto e = component_eval(problem, i, x, seed);
    accumulate_data_term(problem, i, e.deriv, seed, 1.0, sum);
  }
  report.gradient = sum / static_cast<double>(n);
  if (problem.lambda != 0.0) report.gradient += problem.lambda * x;
  report.perturbation_applied = !seeds.empty() && problem.noise.active();
  return report;
}

double smooth_objective(const Problem& problem, const Vec& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i)
    acc += component_eval(problem, i, x).value;
  return acc / static_cast<double>(problem.n()) + 0.5 * problem.lambda * x.squaredNorm();
}

double full_objective(const Problem& problem, const Vec& x) {
  return smooth_objective(problem, x) + reg_value(problem.psi, x);
}

double expected_objective(const Problem& problem, const Vec& x,
                          std::span<const std::uint64_t> mask_seeds, std::size_t per_point) {
  if (problem.noise.kind != NoiseModel::Kind::dropout || !problem.noise.active())
    return full_objective(problem, x);
  const std::size_t n = problem.n();
  if (per_point == 0 || mask_seeds.size() != n * per_point)
    throw std::invalid_argument("expected_objective: mask seed table has the wrong size");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_acc = 0.0;
    for (std::size_t s = 0; s < per_point; ++s)
      row_acc += component_eval(problem, i, x, mask_seeds[i * per_point + s]).value;
    acc += row_acc / static_cast<double>(per_point);
  }
  return acc / static_cast<double>(n) + 0.5 * problem.lambda * x.squaredNorm() +
         reg_value(problem.psi, x);
}

Smoothness smoothness(const Problem& problem) {
  Smoothness s;
  const double c = curvature_constant(problem.loss);
  s.L.resize(problem.n());
  double sum = 0.0;
  for (std::size_t i = 0; i < problem.n(); ++i) {
    const double norm = problem.data->row_norm(i);
    s.L[i] = c * norm * norm + problem.lambda;
    s.L_max = std::max(s.L_max, s.L[i]);
    sum += s.L[i];
  }
  s.L_mean = problem.n() > 0 ? sum / static_cast<double>(problem.n()) : 0.0;
  s.mu = problem.lambda;
  return s;
}

bool gap_available(const Problem& problem) {
  return problem.lambda > 0.0 && problem.psi.is_zero() &&
         !(problem.noise.kind == NoiseModel::Kind::dropout && problem.noise.active());
}

namespace {

// phi*(-alpha) at alpha = -phi'(u).
double conjugate_at_dual(Loss loss, double u) {
  if (loss == Loss::logistic) {
    // alpha = 1/(1+e^u), 1 - alpha = 1/(1+e^-u), with both logs formed
    // directly so that alpha near 0 or 1 keeps full relative accuracy.
    double alpha, log_alpha, one_minus, log_one_minus;
    if (u >= 0.0) {
      const double e = std::exp(-u);
      alpha = e / (1.0 + e);
      one_minus = 1.0 / (1.0 + e);
      log_alpha = -u - std::log1p(e);
      log_one_minus = -std::log1p(e);
    } else {
      const double e = std::exp(u);
      alpha = 1.0 / (1.0 + e);
      one_minus = e / (1.0 + e);
      log_alpha = -std::log1p(e);
      log_one_minus = u - std::log1p(e);
    }
    const double a = alpha > 0.0 ? alpha * log_alpha : 0.0;
    const double b = one_minus > 0.0 ? one_minus * log_one_minus : 0.0;
    return a + b;
  }
  const double alpha = 2.0 * std::max(0.0, 1.0 - u);
  return -alpha + 0.25 * alpha * alpha;
}

}  // namespace

double dual_objective(const Problem& problem, const Vec& x) {
  if (!gap_available(problem))
    throw std::invalid_argument(
        "duality gap unavailable: needs lambda > 0, psi = none and no DropOut");
  const std::size_t n = problem.n();
  Vec w = Vec::Zero(problem.p());
  double conj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = problem.data->row(i);
    const double b = problem.data->label(i);
    const double u = b * row.dot(x);
    const double alpha = -loss_deriv(problem.loss, u);
    conj += conjugate_at_dual(problem.loss, u);
    if (alpha != 0.0) row.axpy(alpha * b, w);
  }
  w /= static_cast<double>(n);
  return -conj / static_cast<double>(n) - w.squaredNorm() / (2.0 * problem.lambda);
}

double duality_gap(const Problem& problem, const Vec& x) {
  const double dual = dual_objective(problem, x);
  return smooth_objective(problem, x) - dual;
}

}  // namespace estseq
