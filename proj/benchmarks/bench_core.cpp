#include <benchmark/benchmark.h>

#include <vector>

#include "relo/agent.hpp"
#include "relo/nn.hpp"
#include "relo/priority.hpp"
#include "relo/replay.hpp"
#include "relo/rng.hpp"
#include "relo/sumtree.hpp"

using namespace relo;

namespace {

SumTree filled_tree(std::size_t n, Rng& rng) {
  SumTree t(n);
  for (std::size_t i = 0; i < n; ++i) t.set_priority(i, 0.01 + uniform01(rng));
  return t;
}

void BM_SumTreeUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  SumTree t = filled_tree(n, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    t.set_priority(i, 0.01 + uniform01(rng));
    i = (i + 7919) % n;
  }
}
BENCHMARK(BM_SumTreeUpdate)->Arg(1 << 10)->Arg(100000);

void BM_SumTreeStratifiedSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const SumTree t = filled_tree(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(t.stratified_sample(32, rng));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_SumTreeStratifiedSample)->Arg(1 << 10)->Arg(100000);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(3);
  const std::vector<std::size_t> sizes = {12, 64, 64, 2};
  const nn::DenseNet net = nn::DenseNet::make(sizes, rng);
  std::vector<double> x(12, 0.0);
  x[5] = 1.0;
  const std::vector<double> cot = {1.0, -0.5};
  nn::ForwardCache cache;
  nn::GradientSet acc = nn::GradientSet::zeros_like(net);
  for (auto _ : state) {
    net.forward(x, cache);
    nn::accumulate_gradient(net, cache, cot, acc);
  }
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_ForwardBackward);

// One learner step on a full 12-state chain buffer, per priority scheme.
void BM_TrainOnBatch(benchmark::State& state) {
  const SchemeConfig schemes[] = {SchemeConfig::uniform(), SchemeConfig::per(), SchemeConfig::relo()};
  const SchemeConfig scheme = schemes[state.range(0)];
  state.SetLabel(scheme.name());
  Rng rng(4);
  agent::AgentConfig cfg;
  agent::LearnerState learner = agent::make_learner(12, 2, cfg, rng);
  ReplayConfig rc;
  rc.capacity = 30000;
  PrioritizedBuffer buf(rc);
  for (std::size_t i = 0; i < rc.capacity; ++i) {
    Transition t;
    const std::size_t s = uniform_index(rng, 11);
    t.state.assign(12, 0.0);
    t.state[s] = 1.0;
    t.next_state.assign(12, 0.0);
    t.next_state[s + 1] = 1.0;
    t.action = static_cast<int>(uniform_index(rng, 2));
    t.reward = uniform01(rng) - 0.5;
    buf.push(t);
  }
  for (auto _ : state) {
    agent::train_on_batch(learner, buf, cfg, scheme, rng);
    agent::maybe_update_target(learner, cfg);
  }
}
BENCHMARK(BM_TrainOnBatch)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
