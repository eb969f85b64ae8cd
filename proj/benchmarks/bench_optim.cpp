#include <benchmark/benchmark.h>

#include "roga/metrics.hpp"
#include "roga/models.hpp"
#include "roga/optim.hpp"
#include "roga/rng.hpp"

using namespace roga;

namespace {

DomainBatch make_batch(std::size_t n, std::size_t d, std::uint64_t seed, int domain_id = 0) {
  Rng rng(seed);
  DomainBatch b;
  b.domain_id = domain_id;
  b.features = Matrix(n, d);
  b.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) b.features(r, c) = rng.normal();
    b.labels[r] = static_cast<int>(r % 2);
  }
  return b;
}

// The default experiment network on 10 features, batch of 64.
struct Fixture {
  ModelSpec spec = default_experiment_model(10);
  Network net{spec};
  ParamVector theta = init_params(spec, {InitScheme::glorot_uniform, 1});
  std::vector<DomainBatch> batches{make_batch(64, 10, 1, 0), make_batch(64, 10, 2, 1),
                                   make_batch(64, 10, 3, 2)};
};

void BM_Grad(benchmark::State& state) {
  Fixture f;
  for (auto _ : state) benchmark::DoNotOptimize(f.net.grad(f.theta, f.batches[0]));
}
BENCHMARK(BM_Grad);

void BM_Hvp(benchmark::State& state) {
  Fixture f;
  const ParamVector v = f.net.grad(f.theta, f.batches[0]);
  for (auto _ : state) benchmark::DoNotOptimize(hvp(f.net, f.theta, f.batches[0], v, 1e-4));
}
BENCHMARK(BM_Hvp);

void BM_SgdStep(benchmark::State& state) {
  Fixture f;
  const DomainBatch pooled = pool_batches(f.batches);
  const ParamVector vel = ParamVector::zeros(f.theta.size());
  for (auto _ : state) benchmark::DoNotOptimize(sgd_step(f.net, f.theta, pooled, {}, vel));
}
BENCHMARK(BM_SgdStep);

void BM_SamStep(benchmark::State& state) {
  Fixture f;
  const DomainBatch pooled = pool_batches(f.batches);
  const ParamVector vel = ParamVector::zeros(f.theta.size());
  for (auto _ : state) benchmark::DoNotOptimize(sam_step(f.net, f.theta, pooled, {}, vel));
}
BENCHMARK(BM_SamStep);

void BM_RogaStep(benchmark::State& state) {
  Fixture f;
  const ParamVector vel = ParamVector::zeros(f.theta.size());
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        roga_step(f.net, f.theta, f.batches, {}, vel, DescentTerm::perturbed, threads));
  }
}
BENCHMARK(BM_RogaStep)->Arg(1)->Arg(3);

void BM_Auc(benchmark::State& state) {
  Rng rng(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform01();
    labels[i] = static_cast<int>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
}
BENCHMARK(BM_Auc)->Arg(2000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
