#include <benchmark/benchmark.h>

#include <random>

#include "carserver/allocator.hpp"

using namespace carserver;
using namespace carserver::allocator;

namespace {

// Homogeneous nodes with staggered costs; every component fits anywhere so
// the search space is the full n^m.
Problem uniform_problem(std::size_t nodes, std::size_t components, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cost(1, 9), mem(1, 4);
  Problem p;
  p.realtime = RealtimeSemantics::RequirementImpliesCapability;
  for (std::size_t i = 0; i < nodes; ++i) {
    Node n;
    n.id = "node" + std::to_string(i);
    n.memoryCapacity = 8 * 512;
    n.processingPower = 1000;
    n.maxBandwidth = Decimal::from_units(1000);
    n.cost = Decimal::from_units(cost(rng));
    p.nodes.push_back(n);
  }
  for (std::size_t j = 0; j < components; ++j) {
    Component c;
    c.id = "c" + std::to_string(j);
    c.memoryDemand = mem(rng) * 512;
    c.processingDemand = 100;
    c.bandwidthDemand = Decimal::from_units(50);
    p.components.push_back(c);
  }
  return p;
}

void BM_Solve(benchmark::State& state) {
  const auto p = uniform_problem(state.range(0), state.range(1), 42);
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_Solve)->Args({4, 6})->Args({6, 10})->Args({8, 14});

void BM_SolveActivation(benchmark::State& state) {
  auto p = uniform_problem(state.range(0), state.range(1), 7);
  p.objective = Objective::NodeActivationCost;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_SolveActivation)->Args({4, 6})->Args({6, 10});

void BM_BruteForce(benchmark::State& state) {
  const auto p = uniform_problem(state.range(0), state.range(1), 42);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force(p));
}
BENCHMARK(BM_BruteForce)->Args({4, 6})->Args({5, 7});

}  // namespace
