#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "estseq/objective.hpp"
#include "estseq/rng.hpp"
#include "estseq/sampling.hpp"

namespace estseq {

enum class EstimatorKind { exact, sgd, svrg, saga_uniform, saga_nonuniform };

std::string_view to_string(EstimatorKind kind);

// Gradient estimators share a two-phase protocol: estimate(x) draws and
// returns g_k at the query point, then post_step(x_prev, x_new) performs the
// state update (table write, anchor refresh). Evaluation counts follow the
// effective-pass convention: one unit per component gradient, except that an
// SVRG step is charged 2 units with anchor refreshes folded in.
class Estimator {
 public:
  Estimator(const Problem& problem, SamplingDist dist);
  virtual ~Estimator() = default;

  virtual EstimatorKind kind() const = 0;
  virtual std::unique_ptr<Estimator> clone() const = 0;

  // Sets up the state at x0 (tables, anchor).
  virtual void init(const Vec& x0, RunStreams& streams) = 0;

  virtual const Vec& estimate(const Vec& x, RunStreams& streams) = 0;
  virtual void post_step(const Vec& /*x_prev*/, const Vec& /*x_new*/, RunStreams& /*streams*/) {}

  // g given the sampled index i, with the noise switched off and the state
  // fixed. Used by enumeration oracles.
  virtual Vec estimate_with_index(const Vec& x, std::size_t i) const = 0;

  // Probability of index i in estimate_with_index enumeration.
  virtual double index_probability(std::size_t i) const { return dist_.q(i); }

  // Effective-pass units charged so far.
  std::uint64_t evaluations() const { return evaluations_; }
  void charge(std::uint64_t units) { evaluations_ += units; }

  // Units per step under the pass convention, used to align evaluations.
  virtual std::uint64_t units_per_step() const = 0;

  std::size_t last_index() const { return last_index_; }
  const Problem& problem() const { return problem_; }
  const SamplingDist& distribution() const { return dist_; }

 protected:
  const Problem& problem_;
  SamplingDist dist_;
  Vec g_;
  std::size_t last_index_ = 0;
  std::uint64_t evaluations_ = 0;
};

class ExactEstimator final : public Estimator {
 public:
  ExactEstimator(const Problem& problem, SamplingDist dist);

  EstimatorKind kind() const override { return EstimatorKind::exact; }
  std::unique_ptr<Estimator> clone() const override {
    return std::make_unique<ExactEstimator>(*this);
  }
  void init(const Vec&, RunStreams&) override {}
  const Vec& estimate(const Vec& x, RunStreams& streams) override;
  Vec estimate_with_index(const Vec& x, std::size_t i) const override;
  std::uint64_t units_per_step() const override { return problem_.n(); }
};

// Average of b independent importance-weighted draws (1/(q_i n)) grad~ f_i(x).
class SgdEstimator final : public Estimator {
 public:
  SgdEstimator(const Problem& problem, SamplingDist dist, std::size_t batch = 1);

  EstimatorKind kind() const override { return EstimatorKind::sgd; }
  std::unique_ptr<Estimator> clone() const override {
    return std::make_unique<SgdEstimator>(*this);
  }
  void init(const Vec&, RunStreams&) override {}
  const Vec& estimate(const Vec& x, RunStreams& streams) override;
  Vec estimate_with_index(const Vec& x, std::size_t i) const override;
  std::uint64_t units_per_step() const override { return batch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t batch_;
};

// Random-SVRG: g = (1/(q_i n))(grad~ f_i(x) - grad~ f_i(x~)) + zbar with the
// anchor refreshed at x_k with probability 1/n. Anchor gradients are not
// stored; their perturbations are regenerated from the seed registry.
class SvrgEstimator final : public Estimator {
 public:
  SvrgEstimator(const Problem& problem, SamplingDist dist);

  EstimatorKind kind() const override { return EstimatorKind::svrg; }
  std::unique_ptr<Estimator> clone() const override {
    return std::make_unique<SvrgEstimator>(*this);
  }
  void init(const Vec& x0, RunStreams& streams) override;
  const Vec& estimate(const Vec& x, RunStreams& streams) override;
  // Refreshes with probability 1/n.
  void post_step(const Vec& x_prev, const Vec& x_new, RunStreams& streams) override;
  Vec estimate_with_index(const Vec& x, std::size_t i) const override;
  std::uint64_t units_per_step() const override { return 2; }

  // Unconditional refresh at x. Used at init, at restarts and by tests.
  void force_refresh(const Vec& x, RunStreams& streams);

  const Vec& anchor() const { return anchor_; }
  const Vec& zbar() const { return zbar_; }
  const SeedRegistry& registry() const { return registry_; }
  std::uint64_t refreshes() const { return registry_.epoch(); }
  bool refreshed_last_step() const { return refreshed_last_; }

  // grad~ f_i(x~) regenerated with the recorded seed.
  Vec replay_anchor_grad(std::size_t i) const;

 private:
  Vec anchor_;
  Vec zbar_;
  SeedRegistry registry_;
  bool refreshed_last_ = false;
};

// How the SAGA/MISO tables store z^i.
enum class TableStorage {
  dense,    // n full p-vectors
  compact,  // one scalar and one seed per index; requires beta == lambda
};

// Table contents at init: z^i = grad~ f_i(x0) - beta x0, or all zeros (the
// MISO initialization).
enum class TableInit { gradients, zero };

struct SagaOptions {
  double beta = 0.0;
  TableStorage storage = TableStorage::dense;
  TableInit table_init = TableInit::gradients;
};

// Shared table machinery for the uniform and non-uniform variants.
class SagaBase : public Estimator {
 public:
  SagaBase(const Problem& problem, SamplingDist dist, SagaOptions options);

  void init(const Vec& x0, RunStreams& streams) override;

  double beta() const { return options_.beta; }
  const SagaOptions& options() const { return options_; }
  const Vec& zbar() const { return zbar_; }
  Vec table_entry(std::size_t i) const;
  // (1/n) sum_i z^i recomputed from scratch.
  Vec table_mean() const;
  // Sets z^i = grad f_i(x) - beta x for all i (unperturbed) and zbar to match.
  void reset_tables_at(const Vec& x);

 protected:
  // z^i <- grad~ f_i(x) - beta x using the given seed; zbar updated
  // incrementally, with a full recomputation every n writes.
  void write_entry(std::size_t i, const Vec& x, std::optional<std::uint64_t> seed);
  void write_entry_with_grad(std::size_t i, const Vec& x, const Vec& grad, double deriv,
                             std::optional<std::uint64_t> seed);

  SagaOptions options_;
  Vec zbar_;
  std::vector<Vec> dense_;
  std::vector<double> derivs_;
  std::vector<std::optional<std::uint64_t>> seeds_;
  std::uint64_t writes_ = 0;

  // Work buffers.
  Vec grad_;
  Vec old_entry_;
};

// Uniform sampling; the entry of the sampled index is overwritten with the
// gradient already computed at x_prev.
class SagaUniformEstimator final : public SagaBase {
 public:
  SagaUniformEstimator(const Problem& problem, SamplingDist dist, SagaOptions options);

  EstimatorKind kind() const override { return EstimatorKind::saga_uniform; }
  std::unique_ptr<Estimator> clone() const override {
    return std::make_unique<SagaUniformEstimator>(*this);
  }
  const Vec& estimate(const Vec& x, RunStreams& streams) override;
  void post_step(const Vec& x_prev, const Vec& x_new, RunStreams& streams) override;
  Vec estimate_with_index(const Vec& x, std::size_t i) const override;
  std::uint64_t units_per_step() const override { return 1; }

 private:
  double pending_deriv_ = 0.0;
  std::optional<std::uint64_t> pending_seed_;
};

// Non-uniform sampling; a second, uniform index j_k updates the table at the
// new iterate.
class SagaNonuniformEstimator final : public SagaBase {
 public:
  SagaNonuniformEstimator(const Problem& problem, SamplingDist dist, SagaOptions options);

  EstimatorKind kind() const override { return EstimatorKind::saga_nonuniform; }
  std::unique_ptr<Estimator> clone() const override {
    return std::make_unique<SagaNonuniformEstimator>(*this);
  }
  const Vec& estimate(const Vec& x, RunStreams& streams) override;
  void post_step(const Vec& x_prev, const Vec& x_new, RunStreams& streams) override;
  Vec estimate_with_index(const Vec& x, std::size_t i) const override;
  std::uint64_t units_per_step() const override { return 2; }

  std::size_t last_update_index() const { return last_j_; }

 private:
  std::size_t last_j_ = 0;
};

struct EstimatorOptions {
  std::size_t batch = 1;
  SagaOptions saga;
};

std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const Problem& problem,
                                          SamplingDist dist, EstimatorOptions options = {});

// omega^2 = E||g - grad f(x)||^2 at x with the estimator state held fixed.
// Enumerates the index exactly when n <= 20 and the noise is off; otherwise a
// Monte Carlo average over `trials` draws from a copy of `streams`.
double variance_probe(const Estimator& estimator, const Vec& x, std::size_t trials,
                      const RunStreams& streams);

}  // namespace estseq
