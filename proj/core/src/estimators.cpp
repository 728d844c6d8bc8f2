#include "estseq/estimators.hpp"

#include <stdexcept>

namespace estseq {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::exact: return "exact";
    case EstimatorKind::sgd: return "sgd";
    case EstimatorKind::svrg: return "svrg";
    case EstimatorKind::saga_uniform: return "saga_uniform";
    case EstimatorKind::saga_nonuniform: return "saga_nonuniform";
  }
  return "?";
}

namespace {

// grad~ f_i(x) written into out (overwritten).
void component_grad_into(const Problem& problem, std::size_t i, const Vec& x,
                         std::optional<std::uint64_t> seed, Vec& out) {
  out.setZero(problem.p());
  accumulate_component_grad(problem, i, x, seed, 1.0, out);
}

}  // namespace

Estimator::Estimator(const Problem& problem, SamplingDist dist)
    : problem_(problem), dist_(std::move(dist)), g_(Vec::Zero(problem.p())) {
  if (dist_.size() != problem.n())
    throw std::invalid_argument("sampling distribution size does not match the problem");
}

// ---------------------------------------------------------------- exact

ExactEstimator::ExactEstimator(const Problem& problem, SamplingDist dist)
    : Estimator(problem, std::move(dist)) {}

const Vec& ExactEstimator::estimate(const Vec& x, RunStreams&) {
  g_ = full_grad(problem_, x).gradient;
  charge(problem_.n());
  return g_;
}

Vec ExactEstimator::estimate_with_index(const Vec& x, std::size_t) const {
  return full_grad(problem_, x).gradient;
}

// ---------------------------------------------------------------- sgd

SgdEstimator::SgdEstimator(const Problem& problem, SamplingDist dist, std::size_t batch)
    : Estimator(problem, std::move(dist)), batch_(batch) {
  if (batch_ < 1) throw std::invalid_argument("minibatch size must be at least 1");
}

const Vec& SgdEstimator::estimate(const Vec& x, RunStreams& streams) {
  g_.setZero();
  const double inv_b = 1.0 / static_cast<double>(batch_);
  for (std::size_t t = 0; t < batch_; ++t) {
    const std::size_t i = dist_.sample(streams.index);
    const std::uint64_t seed = streams.perturbation.next_seed();
    accumulate_component_grad(problem_, i, x, seed, dist_.weight(i) * inv_b, g_);
    last_index_ = i;
  }
  charge(batch_);
  return g_;
}

Vec SgdEstimator::estimate_with_index(const Vec& x, std::size_t i) const {
  Vec g;
  component_grad_into(problem_, i, x, std::nullopt, g);
  return dist_.weight(i) * g;
}

// ---------------------------------------------------------------- svrg

SvrgEstimator::SvrgEstimator(const Problem& problem, SamplingDist dist)
    : Estimator(problem, std::move(dist)),
      anchor_(Vec::Zero(problem.p())),
      zbar_(Vec::Zero(problem.p())),
      registry_(problem.n()) {}

void SvrgEstimator::init(const Vec& x0, RunStreams& streams) { force_refresh(x0, streams); }

void SvrgEstimator::force_refresh(const Vec& x, RunStreams& streams) {
  const std::size_t n = problem_.n();
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    seeds[i] = streams.perturbation.next_seed();
    registry_.record(i, seeds[i]);
  }
  anchor_ = x;
  zbar_ = full_grad(problem_, anchor_, seeds).gradient;
  registry_.bump_epoch();
}

const Vec& SvrgEstimator::estimate(const Vec& x, RunStreams& streams) {
  const std::size_t i = dist_.sample(streams.index);
  // Fresh perturbation for the x-term, replayed one for the anchor term.
  const std::uint64_t seed = streams.perturbation.next_seed();
  Vec gx, ga;
  component_grad_into(problem_, i, x, seed, gx);
  component_grad_into(problem_, i, anchor_, registry_.replay(i), ga);
  g_ = zbar_ + dist_.weight(i) * (gx - ga);
  last_index_ = i;
  charge(2);
  return g_;
}

void SvrgEstimator::post_step(const Vec&, const Vec& x_new, RunStreams& streams) {
  refreshed_last_ = streams.refresh.bernoulli(1.0 / static_cast<double>(problem_.n()));
  if (refreshed_last_) force_refresh(x_new, streams);
}

Vec SvrgEstimator::estimate_with_index(const Vec& x, std::size_t i) const {
  Vec gx, ga;
  component_grad_into(problem_, i, x, std::nullopt, gx);
  component_grad_into(problem_, i, anchor_, std::nullopt, ga);
  return zbar_ + dist_.weight(i) * (gx - ga);
}

Vec SvrgEstimator::replay_anchor_grad(std::size_t i) const {
  Vec g;
  component_grad_into(problem_, i, anchor_, registry_.replay(i), g);
  return g;
}

// ---------------------------------------------------------------- saga tables

SagaBase::SagaBase(const Problem& problem, SamplingDist dist, SagaOptions options)
    : Estimator(problem, std::move(dist)), options_(options), zbar_(Vec::Zero(problem.p())) {
  if (!(options_.beta >= 0.0) || options_.beta > problem.mu())
    throw std::invalid_argument("beta must lie in [0, mu]");
  const std::size_t n = problem.n();
  if (options_.storage == TableStorage::compact) {
    if (options_.beta != problem.lambda)
      throw std::invalid_argument("compact table storage requires beta == lambda");
    derivs_.assign(n, 0.0);
    seeds_.assign(n, std::nullopt);
  } else {
    dense_.assign(n, Vec::Zero(problem.p()));
  }
}

Vec SagaBase::table_entry(std::size_t i) const {
  if (options_.storage == TableStorage::dense) return dense_.at(i);
  // grad~ f_i(x) - lambda x = deriv * b_i * a~_i + zeta
  Vec z = Vec::Zero(problem_.p());
  accumulate_data_term(problem_, i, derivs_.at(i), seeds_[i], 1.0, z);
  return z;
}

Vec SagaBase::table_mean() const {
  Vec sum = Vec::Zero(problem_.p());
  if (options_.storage == TableStorage::dense) {
    for (const auto& z : dense_) sum += z;
  } else {
    for (std::size_t i = 0; i < problem_.n(); ++i)
      accumulate_data_term(problem_, i, derivs_[i], seeds_[i], 1.0, sum);
  }
  return sum / static_cast<double>(problem_.n());
}

void SagaBase::init(const Vec& x0, RunStreams& streams) {
  const std::size_t n = problem_.n();
  writes_ = 0;
  if (options_.table_init == TableInit::zero) {
    for (auto& z : dense_) z.setZero();
    std::fill(derivs_.begin(), derivs_.end(), 0.0);
    std::fill(seeds_.begin(), seeds_.end(), std::nullopt);
    zbar_.setZero();
    return;
  }
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) {
    seeds[i] = streams.perturbation.next_seed();
    if (options_.storage == TableStorage::dense) {
      component_grad_into(problem_, i, x0, seeds[i], grad_);
      dense_[i] = grad_ - options_.beta * x0;
    } else {
      derivs_[i] = component_eval(problem_, i, x0, seeds[i]).deriv;
      seeds_[i] = seeds[i];
    }
  }
  // The average is formed by the same routine as the full gradient, so that a
  // table set at x matches grad f(x) bit for bit when beta = 0.
  zbar_ = full_grad(problem_, x0, seeds).gradient - options_.beta * x0;
  charge(n);
}

void SagaBase::reset_tables_at(const Vec& x) {
  for (std::size_t i = 0; i < problem_.n(); ++i) {
    if (options_.storage == TableStorage::dense) {
      component_grad_into(problem_, i, x, std::nullopt, grad_);
      dense_[i] = grad_ - options_.beta * x;
    } else {
      derivs_[i] = component_eval(problem_, i, x).deriv;
      seeds_[i] = std::nullopt;
    }
  }
  zbar_ = full_grad(problem_, x).gradient - options_.beta * x;
  writes_ = 0;
}

void SagaBase::write_entry_with_grad(std::size_t i, const Vec& x, const Vec& grad, double deriv,
                                     std::optional<std::uint64_t> seed) {
  const double inv_n = 1.0 / static_cast<double>(problem_.n());
  if (options_.storage == TableStorage::dense) {
    old_entry_ = dense_[i];
    dense_[i] = grad - options_.beta * x;
    zbar_ += inv_n * (dense_[i] - old_entry_);
  } else {
    // new - old = (d_new b a~_new + zeta_new) - (d_old b a~_old + zeta_old)
    accumulate_data_term(problem_, i, derivs_[i], seeds_[i], -inv_n, zbar_);
    derivs_[i] = deriv;
    seeds_[i] = seed;
    accumulate_data_term(problem_, i, deriv, seed, inv_n, zbar_);
  }
  if (++writes_ % problem_.n() == 0) zbar_ = table_mean();
}

void SagaBase::write_entry(std::size_t i, const Vec& x, std::optional<std::uint64_t> seed) {
  double deriv = 0.0;
  if (options_.storage == TableStorage::dense)
    component_grad_into(problem_, i, x, seed, grad_);
  else
    deriv = component_eval(problem_, i, x, seed).deriv;
  write_entry_with_grad(i, x, grad_, deriv, seed);
}

// ---------------------------------------------------------------- saga uniform

SagaUniformEstimator::SagaUniformEstimator(const Problem& problem, SamplingDist dist,
                                           SagaOptions options)
    : SagaBase(problem, std::move(dist), options) {
  if (!dist_.is_uniform())
    throw std::invalid_argument("the uniform table estimator needs uniform sampling");
}

const Vec& SagaUniformEstimator::estimate(const Vec& x, RunStreams& streams) {
  const std::size_t i = dist_.sample(streams.index);
  const std::uint64_t seed = streams.perturbation.next_seed();
  component_grad_into(problem_, i, x, seed, grad_);
  if (options_.storage == TableStorage::compact)
    pending_deriv_ = component_eval(problem_, i, x, seed).deriv;
  pending_seed_ = seed;
  if (options_.storage == TableStorage::dense)
    g_ = zbar_ + (grad_ - dense_[i]);
  else
    g_ = zbar_ + (grad_ - table_entry(i));
  last_index_ = i;
  charge(1);
  return g_;
}

void SagaUniformEstimator::post_step(const Vec& x_prev, const Vec&, RunStreams&) {
  // The entry of i_k takes the gradient computed at x_prev by estimate().
  write_entry_with_grad(last_index_, x_prev, grad_, pending_deriv_, pending_seed_);
}

Vec SagaUniformEstimator::estimate_with_index(const Vec& x, std::size_t i) const {
  Vec g;
  component_grad_into(problem_, i, x, std::nullopt, g);
  return zbar_ + (g - table_entry(i));
}

// ---------------------------------------------------------------- saga non-uniform

SagaNonuniformEstimator::SagaNonuniformEstimator(const Problem& problem, SamplingDist dist,
                                                 SagaOptions options)
    : SagaBase(problem, std::move(dist), options) {}

const Vec& SagaNonuniformEstimator::estimate(const Vec& x, RunStreams& streams) {
  const std::size_t i = dist_.sample(streams.index);
  const std::uint64_t seed = streams.perturbation.next_seed();
  component_grad_into(problem_, i, x, seed, grad_);
  const double w = dist_.weight(i);
  g_ = zbar_ + w * (grad_ - table_entry(i));
  if (options_.beta != 0.0) g_ += options_.beta * (1.0 - w) * x;
  last_index_ = i;
  charge(1);
  return g_;
}

void SagaNonuniformEstimator::post_step(const Vec&, const Vec& x_new, RunStreams& streams) {
  last_j_ = streams.auxiliary.uniform_index(problem_.n());
  write_entry(last_j_, x_new, streams.perturbation.next_seed());
  charge(1);
}

Vec SagaNonuniformEstimator::estimate_with_index(const Vec& x, std::size_t i) const {
  Vec g;
  component_grad_into(problem_, i, x, std::nullopt, g);
  const double w = dist_.weight(i);
  Vec out = zbar_ + w * (g - table_entry(i));
  if (options_.beta != 0.0) out += options_.beta * (1.0 - w) * x;
  return out;
}

// ---------------------------------------------------------------- helpers

std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const Problem& problem,
                                          SamplingDist dist, EstimatorOptions options) {
  switch (kind) {
    case EstimatorKind::exact:
      return std::make_unique<ExactEstimator>(problem, std::move(dist));
    case EstimatorKind::sgd:
      return std::make_unique<SgdEstimator>(problem, std::move(dist), options.batch);
    case EstimatorKind::svrg:
      return std::make_unique<SvrgEstimator>(problem, std::move(dist));
    case EstimatorKind::saga_uniform:
      return std::make_unique<SagaUniformEstimator>(problem, std::move(dist), options.saga);
    case EstimatorKind::saga_nonuniform:
      return std::make_unique<SagaNonuniformEstimator>(problem, std::move(dist), options.saga);
  }
  throw std::invalid_argument("unknown estimator kind");
}

double variance_probe(const Estimator& estimator, const Vec& x, std::size_t trials,
                      const RunStreams& streams) {
  const Problem& problem = estimator.problem();
  const Vec grad = full_grad(problem, x).gradient;
  if (estimator.kind() == EstimatorKind::exact) return 0.0;

  if (problem.n() <= 20 && !problem.noise.active()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < problem.n(); ++i)
      acc += estimator.index_probability(i) * (estimator.estimate_with_index(x, i) - grad).squaredNorm();
    if (estimator.kind() == EstimatorKind::sgd)
      acc /= static_cast<double>(static_cast<const SgdEstimator&>(estimator).batch());
    return acc;
  }

  if (trials < 1) throw std::invalid_argument("variance_probe needs at least one trial");
  auto probe = estimator.clone();
  RunStreams local = streams;
  double acc = 0.0;
  for (std::size_t t = 0; t < trials; ++t)
    acc += (probe->estimate(x, local) - grad).squaredNorm();
  return acc / static_cast<double>(trials);
}

}  // namespace estseq
