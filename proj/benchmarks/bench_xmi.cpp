#include <benchmark/benchmark.h>

#include "carserver/text.hpp"
#include "carserver/xmi.hpp"

using namespace carserver;

namespace {

const std::string kFixture = std::string(CARSERVER_SOURCE_DIR) + "/tests/data/emergency_brake.carxmi";

void BM_Parse(benchmark::State& state) {
  const std::string doc = text::read_file(kFixture);
  for (auto _ : state) benchmark::DoNotOptimize(xmi::parse_instance(doc));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * doc.size()));
}
BENCHMARK(BM_Parse);

void BM_Serialize(benchmark::State& state) {
  const auto inst = xmi::load_instance(kFixture);
  for (auto _ : state) benchmark::DoNotOptimize(xmi::serialize_instance(inst));
}
BENCHMARK(BM_Serialize);

void BM_ParseScaling(benchmark::State& state) {
  metamodel::ModelInstance inst;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    metamodel::Camera c;
    c.id = "camera" + std::to_string(i);
    c.width = 1920;
    c.height = 1080;
    inst.add(c);
  }
  const std::string doc = xmi::serialize_instance(inst);
  for (auto _ : state) benchmark::DoNotOptimize(xmi::parse_instance(doc));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ParseScaling)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

}  // namespace
