#include <gtest/gtest.h>

#include "estseq/estimators.hpp"
#include "fixtures.hpp"

using namespace estseq;
using namespace estseq::testing;

namespace {

struct Rig {
  Problem problem;
  SamplingDist dist;
  std::unique_ptr<Estimator> est;
  RunStreams streams{5};
  Vec x;

  Rig(Problem p, EstimatorKind kind, SamplingMode mode, EstimatorOptions opts = {})
      : problem(std::move(p)),
        dist(make_distribution(mode, smoothness(problem).L)),
        est(make_estimator(kind, problem, dist, opts)),
        x(Vec::Zero(problem.p())) {
    est->init(x, streams);
  }

  // A plain gradient-like step so that tables and anchors drift from x0.
  void walk(int steps, double eta = 0.5) {
    for (int t = 0; t < steps; ++t) {
      const Vec prev = x;
      x = x - eta * est->estimate(x, streams);
      est->post_step(prev, x, streams);
    }
  }
};

Vec enumerated_mean(const Estimator& est, const Vec& x) {
  Vec acc = Vec::Zero(x.size());
  for (std::size_t i = 0; i < est.problem().n(); ++i)
    acc += est.index_probability(i) * est.estimate_with_index(x, i);
  return acc;
}

Problem scaled(std::size_t n, double lambda) {
  // Rows of unequal norm so that Lipschitz sampling is non-trivial.
  std::vector<double> rows, labels;
  RandomStream rng(31);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = 0.5 + 2.0 * static_cast<double>(i) / static_cast<double>(n);
    for (int j = 0; j < 4; ++j) rows.push_back(s * rng.normal());
    labels.push_back(i % 3 == 0 ? -1.0 : 1.0);
  }
  return Problem(dense_dataset(4, rows, labels), Loss::logistic, lambda);
}

}  // namespace

TEST(Estimators, ExactReturnsFullGradient) {
  Rig r(synthetic_problem(12, 4, 0.1), EstimatorKind::exact, SamplingMode::uniform);
  RandomStream rng(1);
  const Vec x = random_vector(4, rng);
  const Vec g = r.est->estimate(x, r.streams);
  EXPECT_LE((g - full_grad(r.problem, x).gradient).norm(), 1e-15);
  EXPECT_EQ(r.est->evaluations(), 12u);
}

TEST(Estimators, UnbiasedByEnumeration) {
  struct Case {
    EstimatorKind kind;
    SamplingMode mode;
    double beta;
  };
  const std::vector<Case> cases = {
      {EstimatorKind::sgd, SamplingMode::uniform, 0.0},
      {EstimatorKind::sgd, SamplingMode::lipschitz, 0.0},
      {EstimatorKind::svrg, SamplingMode::uniform, 0.0},
      {EstimatorKind::svrg, SamplingMode::lipschitz, 0.0},
      {EstimatorKind::saga_uniform, SamplingMode::uniform, 0.0},
      {EstimatorKind::saga_uniform, SamplingMode::uniform, 0.05},
      {EstimatorKind::saga_nonuniform, SamplingMode::lipschitz, 0.0},
      {EstimatorKind::saga_nonuniform, SamplingMode::lipschitz, 0.05},
  };
  for (const auto& c : cases) {
    EstimatorOptions opts;
    opts.saga.beta = c.beta;
    Rig r(scaled(15, 0.1), c.kind, c.mode, opts);
    r.walk(40, 0.2);
    RandomStream rng(2);
    const Vec x = r.x + random_vector(4, rng, 0.3);
    const Vec mean = enumerated_mean(*r.est, x);
    EXPECT_LE(relative_error(mean, full_grad(r.problem, x).gradient), 1e-12)
        << to_string(c.kind) << " beta " << c.beta;
  }
}

TEST(Estimators, PassChargingPerStep) {
  const Problem p = synthetic_problem(10, 3, 0.1);
  const std::vector<std::pair<EstimatorKind, std::uint64_t>> cases = {
      {EstimatorKind::sgd, 1}, {EstimatorKind::svrg, 2}, {EstimatorKind::saga_uniform, 1}};
  for (const auto& [kind, units] : cases) {
    Rig r(p, kind, SamplingMode::uniform);
    const auto before = r.est->evaluations();
    r.walk(7);
    EXPECT_EQ(r.est->evaluations() - before, 7 * units) << to_string(kind);
    EXPECT_EQ(r.est->units_per_step(), units);
  }
  Rig nu(p, EstimatorKind::saga_nonuniform, SamplingMode::lipschitz);
  const auto before = nu.est->evaluations();
  nu.walk(7);
  EXPECT_EQ(nu.est->evaluations() - before, 14u);
}

TEST(Svrg, RefreshSetsAnchorAndMean) {
  Rig r(synthetic_problem(20, 5, 0.1), EstimatorKind::svrg, SamplingMode::uniform);
  auto& svrg = dynamic_cast<SvrgEstimator&>(*r.est);
  EXPECT_EQ(svrg.refreshes(), 1u);
  r.walk(5);
  svrg.force_refresh(r.x, r.streams);
  EXPECT_TRUE((svrg.anchor().array() == r.x.array()).all());
  EXPECT_LE((svrg.zbar() - full_grad(r.problem, r.x).gradient).norm(), 1e-15);
}

TEST(Svrg, RefreshProbabilityIsOneOverN) {
  Rig r(synthetic_problem(10, 3, 0.1), EstimatorKind::svrg, SamplingMode::uniform);
  auto& svrg = dynamic_cast<SvrgEstimator&>(*r.est);
  const int N = 20000;
  const auto start = svrg.refreshes();
  r.walk(N, 0.01);
  const double rate = static_cast<double>(svrg.refreshes() - start) / N;
  EXPECT_NEAR(rate, 0.1, 4.0 * std::sqrt(0.09 / N));
}

TEST(Svrg, AnchorPerturbationsReplayed) {
  const Problem p = synthetic_problem(8, 4, 0.1, Loss::logistic, 3, 0.05, NoiseModel::dropout(0.3));
  Rig r(p, EstimatorKind::svrg, SamplingMode::uniform);
  auto& svrg = dynamic_cast<SvrgEstimator&>(*r.est);
  r.walk(3);
  Vec mean = Vec::Zero(4);
  for (std::size_t i = 0; i < 8; ++i) {
    const Vec g = svrg.replay_anchor_grad(i);
    EXPECT_TRUE((g.array() ==
                 component_grad(p, i, svrg.anchor(), svrg.registry().replay(i)).gradient.array())
                    .all());
    mean += g / 8.0;
  }
  EXPECT_LE((mean - svrg.zbar()).norm(), 1e-14);
}

TEST(Saga, TableMeanTracksIncrementalAverage) {
  for (auto kind : {EstimatorKind::saga_uniform, EstimatorKind::saga_nonuniform}) {
    const auto mode =
        kind == EstimatorKind::saga_uniform ? SamplingMode::uniform : SamplingMode::lipschitz;
    Rig r(scaled(13, 0.05), kind, mode);
    r.walk(37, 0.1);
    const auto& saga = dynamic_cast<const SagaBase&>(*r.est);
    EXPECT_LE((saga.table_mean() - saga.zbar()).norm(), 1e-13) << to_string(kind);
  }
}

TEST(Saga, UniformWritesGradientAtQueryPoint) {
  EstimatorOptions opts;
  opts.saga.beta = 0.05;
  Rig r(synthetic_problem(9, 3, 0.1), EstimatorKind::saga_uniform, SamplingMode::uniform, opts);
  r.walk(4);
  const Vec prev = r.x;
  const Vec g = r.est->estimate(prev, r.streams);
  const std::size_t i = r.est->last_index();
  r.x = prev - 0.3 * g;
  r.est->post_step(prev, r.x, r.streams);
  const auto& saga = dynamic_cast<const SagaBase&>(*r.est);
  const Vec want = component_grad(r.problem, i, prev).gradient - 0.05 * prev;
  EXPECT_LE((saga.table_entry(i) - want).norm(), 1e-15);
}

TEST(Saga, CompactStorageMatchesDense) {
  const Problem p = synthetic_problem(11, 5, 0.1, Loss::logistic, 4, 0.05, NoiseModel::dropout(0.2));
  EstimatorOptions dense, compact;
  dense.saga.beta = compact.saga.beta = 0.1;
  compact.saga.storage = TableStorage::compact;
  Rig a(p, EstimatorKind::saga_uniform, SamplingMode::uniform, dense);
  Rig b(p, EstimatorKind::saga_uniform, SamplingMode::uniform, compact);
  for (int t = 0; t < 60; ++t) {
    a.walk(1, 0.2);
    b.walk(1, 0.2);
    ASSERT_LE((a.x - b.x).norm(), 1e-12) << "step " << t;
  }
}

TEST(Saga, CompactNeedsBetaEqualLambda) {
  const Problem p = synthetic_problem(5, 2, 0.1);
  EstimatorOptions opts;
  opts.saga.storage = TableStorage::compact;
  opts.saga.beta = 0.0;
  EXPECT_THROW(make_estimator(EstimatorKind::saga_uniform, p,
                              make_distribution(SamplingMode::uniform, smoothness(p).L), opts),
               std::invalid_argument);
  opts.saga.beta = 0.2;
  opts.saga.storage = TableStorage::dense;
  EXPECT_THROW(make_estimator(EstimatorKind::saga_uniform, p,
                              make_distribution(SamplingMode::uniform, smoothness(p).L), opts),
               std::invalid_argument);
}

TEST(Saga, UniformRejectsNonuniformSampling) {
  const Problem p = scaled(6, 0.1);
  EXPECT_THROW(make_estimator(EstimatorKind::saga_uniform, p,
                              make_distribution(SamplingMode::lipschitz, smoothness(p).L)),
               std::invalid_argument);
}

TEST(Saga, ZeroTableInit) {
  EstimatorOptions opts;
  opts.saga.table_init = TableInit::zero;
  Rig r(synthetic_problem(6, 3, 0.1), EstimatorKind::saga_uniform, SamplingMode::uniform, opts);
  const auto& saga = dynamic_cast<const SagaBase&>(*r.est);
  EXPECT_EQ(saga.zbar().norm(), 0.0);
  EXPECT_EQ(saga.table_entry(2).norm(), 0.0);
}

TEST(VarianceProbe, PositiveForSgdAwayFromOptimum) {
  Rig r(synthetic_problem(15, 4, 0.1), EstimatorKind::sgd, SamplingMode::uniform);
  RandomStream rng(8);
  const Vec x = random_vector(4, rng);
  EXPECT_GT(variance_probe(*r.est, x, 1, r.streams), 0.0);
  // Monte Carlo path: noise on.
  Rig noisy(synthetic_problem(15, 4, 0.1, Loss::logistic, 7, 0.05, NoiseModel::gaussian(0.3)),
            EstimatorKind::sgd, SamplingMode::uniform);
  EXPECT_GT(variance_probe(*noisy.est, x, 200, noisy.streams), 0.0);
  EXPECT_THROW(variance_probe(*noisy.est, x, 0, noisy.streams), std::invalid_argument);
}
