#include <benchmark/benchmark.h>

#include <memory>

#include "estseq/dataset.hpp"
#include "estseq/estimators.hpp"
#include "estseq/objective.hpp"
#include "estseq/prox.hpp"
#include "estseq/solvers.hpp"

using namespace estseq;

namespace {

Problem make_problem(std::int64_t n, std::int64_t p, NoiseModel noise = NoiseModel::none()) {
  auto data = std::make_shared<const Dataset>(synthesize(static_cast<std::size_t>(n), p, 1, 0.05));
  return Problem(data, Loss::logistic, 1.0 / (10.0 * static_cast<double>(n)), Regularizer::zero(),
                 noise);
}

Vec point(std::int64_t p) {
  RandomStream rng(2);
  Vec x(p);
  for (auto& v : x) v = 0.1 * rng.normal();
  return x;
}

void BM_ComponentGrad(benchmark::State& state) {
  const Problem prob = make_problem(1000, state.range(0));
  const Vec x = point(prob.p());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(component_grad(prob, i, x));
    i = (i + 1) % prob.n();
  }
}
BENCHMARK(BM_ComponentGrad)->Arg(50)->Arg(500);

void BM_ComponentGradDropout(benchmark::State& state) {
  const Problem prob = make_problem(1000, state.range(0), NoiseModel::dropout(0.1));
  const Vec x = point(prob.p());
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(component_grad(prob, seed % prob.n(), x, seed));
    ++seed;
  }
}
BENCHMARK(BM_ComponentGradDropout)->Arg(50)->Arg(500);

void BM_FullGrad(benchmark::State& state) {
  const Problem prob = make_problem(state.range(0), 50);
  const Vec x = point(prob.p());
  for (auto _ : state) benchmark::DoNotOptimize(full_grad(prob, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullGrad)->Arg(1000)->Arg(10000);

void BM_ProxL1(benchmark::State& state) {
  const auto reg = Regularizer::l1(0.01);
  Vec u = point(state.range(0));
  for (auto _ : state) {
    prox_inplace(reg, 0.5, u);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_ProxL1)->Arg(50)->Arg(5000);

void BM_SolverStep(benchmark::State& state, EstimatorKind kind, Variant variant) {
  const Problem prob = make_problem(1000, 50);
  const auto dist = make_distribution(SamplingMode::uniform, smoothness(prob).L);
  const ScheduleKind sk =
      variant == Variant::acc_svrg ? ScheduleKind::accsvrg_const : ScheduleKind::svrg_const_adaptive;
  Solver solver(prob, variant, make_estimator(kind, prob, dist),
                make_schedule(sk, prob, dist, StepMode::experiment), 3);
  solver.init(Vec::Zero(prob.p()));
  for (auto _ : state) solver.step();
}
BENCHMARK_CAPTURE(BM_SolverStep, svrg, EstimatorKind::svrg, Variant::A);
BENCHMARK_CAPTURE(BM_SolverStep, acc_svrg, EstimatorKind::svrg, Variant::acc_svrg);
BENCHMARK_CAPTURE(BM_SolverStep, saga, EstimatorKind::saga_uniform, Variant::A);
BENCHMARK_CAPTURE(BM_SolverStep, sgd, EstimatorKind::sgd, Variant::A);

}  // namespace

BENCHMARK_MAIN();
