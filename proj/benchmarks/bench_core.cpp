#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>

#include <gavg/averaging.hpp>
#include <gavg/testkit.hpp>

using namespace gavg;

namespace {

std::shared_ptr<const Group> su2() {
  return std::make_shared<const Group>(GroupFamily::SU2);
}

std::shared_ptr<const ActionChart> rotation_chart() {
  auto u1 = std::make_shared<const Group>(GroupFamily::U1);
  ActionFn rot = [](const GroupPoint& g, const BasePoint& x) {
    const double th = std::arg(g.m(0, 0));
    BasePoint y(2);
    y << std::cos(th) * x[0] - std::sin(th) * x[1],
        std::sin(th) * x[0] + std::cos(th) * x[1];
    return y;
  };
  return std::make_shared<const ActionChart>(u1, 2, 0.2, rot);
}

CandidateMap perturbed_map(std::shared_ptr<const GroupoidChart> chart) {
  auto field = random_correction_field(chart->group_ptr(), chart->base_dim(),
                                       chart->base_radius(), 2, 11);
  return CandidateMap::closed_form(chart, [field](const Arrow& p) {
    AlgebraVector v = field(p);
    v.m *= 1e-2;
    return v;
  });
}

void BM_GroupMultiply(benchmark::State& state) {
  auto g = su2();
  std::mt19937_64 rng(1);
  const GroupPoint a = g->random_point(rng);
  const GroupPoint b = g->random_point(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(g->multiply(a, b));
  }
}
BENCHMARK(BM_GroupMultiply);

void BM_ExpLogRoundtrip(benchmark::State& state) {
  auto g = su2();
  std::mt19937_64 rng(2);
  const AlgebraVector v = g->random_algebra(rng, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(g->log_map(g->exp_map(v)));
  }
}
BENCHMARK(BM_ExpLogRoundtrip);

void BM_HaarQuadrature(benchmark::State& state) {
  auto g = su2();
  for (auto _ : state) {
    benchmark::DoNotOptimize(g->haar_quadrature(static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_HaarQuadrature)->Arg(4)->Arg(8);

void BM_FiberConstruction(benchmark::State& state) {
  auto chart = rotation_chart();
  const HaarSystem haar =
      direct_haar_system(chart, chart->group().haar_quadrature(12));
  BasePoint y(2);
  y << 0.1, -0.07;
  for (auto _ : state) {
    benchmark::DoNotOptimize(haar.fiber(y));
  }
}
BENCHMARK(BM_FiberConstruction);

void BM_DefectEvaluation(benchmark::State& state) {
  auto chart = rotation_chart();
  const CandidateMap phi = perturbed_map(chart);
  const auto pairs = sample_composable_pairs(*chart, {3, 4, 2000, 3});
  for (auto _ : state) {
    benchmark::DoNotOptimize(defect(phi, pairs));
  }
}
BENCHMARK(BM_DefectEvaluation);

void BM_AverageStepClosedForm(benchmark::State& state) {
  auto chart = rotation_chart();
  const HaarSystem haar =
      direct_haar_system(chart, chart->group().haar_quadrature(12));
  const CandidateMap phi = perturbed_map(chart);
  const auto pairs = sample_composable_pairs(*chart, {2, 3, 200, 5});
  for (auto _ : state) {
    const CandidateMap next = average_step(phi, haar);
    benchmark::DoNotOptimize(defect(next, pairs));
  }
}
BENCHMARK(BM_AverageStepClosedForm);

void BM_GridRefit(benchmark::State& state) {
  ActionFn triv = [](const GroupPoint&, const BasePoint& x) { return x; };
  auto chart = std::make_shared<const ActionChart>(su2(), 2, 0.2, triv);
  auto field = random_correction_field(chart->group_ptr(), 2, 0.2, 1, 7);
  const CandidateMap phi = CandidateMap::grid_from_function(
      chart, GridSpec{4, 5, 3}, [&](const Arrow& p) {
        AlgebraVector v = field(p);
        v.m *= 1e-2;
        return v;
      });
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi.with_samples(phi.samples()));
  }
}
BENCHMARK(BM_GridRefit);

}  // namespace

BENCHMARK_MAIN();
