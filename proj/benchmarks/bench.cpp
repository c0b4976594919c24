#include <benchmark/benchmark.h>

#include "orgmarl/belief.hpp"
#include "orgmarl/learner.hpp"

using namespace orgmarl;

static void BM_EnvStep(benchmark::State& state) {
  DomainParams p;
  Environment env(p);
  Rng rng(1);
  env.reset(rng);
  const std::vector<Action> actions{Action::Group, Action::Self};
  for (auto _ : state) {
    benchmark::DoNotOptimize(env.step(actions, rng));
  }
}
BENCHMARK(BM_EnvStep);

static void BM_BeliefUpdate(benchmark::State& state) {
  ModelBelief b = make_uniform_belief(PublicSymbol::Several);
  for (auto _ : state) {
    b = correct(b, Action::Group, 0.2);
    b = advance(b, PublicSymbol::Several, 0.0, 1.0);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_BeliefUpdate);

static void BM_NetForward(benchmark::State& state) {
  Rng rng(2);
  const DenseNet net = DenseNet::init(kFeatureDim, 32, 9, rng);
  const std::vector<double> x{1, 0, 0, 0, 1, 0, 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, x));
  }
}
BENCHMARK(BM_NetForward);

static void BM_NetBackward(benchmark::State& state) {
  Rng rng(3);
  const DenseNet net = DenseNet::init(kFeatureDim, 32, 9, rng);
  const std::vector<double> x{1, 0, 0, 0, 1, 0, 0.3};
  const ForwardCache fc = forward(net, x);
  std::vector<double> upstream(9, 0.0);
  upstream[4] = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(net, fc, upstream));
  }
}
BENCHMARK(BM_NetBackward);

static void BM_Episode(benchmark::State& state) {
  DomainParams p;
  Environment env(p);
  Rng rng(4);
  std::vector<Learner> learners;
  LearnerConfig lc;
  learners.emplace_back(lc, p, 0, rng);
  learners.emplace_back(lc, p, 1, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(env, learners, 20, rng));
  }
}
BENCHMARK(BM_Episode);

BENCHMARK_MAIN();
