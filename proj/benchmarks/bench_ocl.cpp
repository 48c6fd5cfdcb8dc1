#include <benchmark/benchmark.h>

#include "carserver/ocl.hpp"
#include "carserver/text.hpp"
#include "carserver/xmi.hpp"

using namespace carserver;

namespace {

const std::string kData = std::string(CARSERVER_SOURCE_DIR) + "/tests/data/";

void BM_ParseRules(benchmark::State& state) {
  const std::string rules = text::read_file(kData + "reference_rules.ocl");
  for (auto _ : state) benchmark::DoNotOptimize(ocl::parse_ocl(rules));
}
BENCHMARK(BM_ParseRules);

void BM_CheckAll(benchmark::State& state) {
  const auto doc = *ocl::parse_ocl(text::read_file(kData + "reference_rules.ocl")).document;
  const auto inst = xmi::load_instance(kData + "emergency_brake.carxmi");
  for (auto _ : state) benchmark::DoNotOptimize(ocl::check_all(doc, inst));
}
BENCHMARK(BM_CheckAll);

// Many cameras under one feature: forAll over a growing collection.
void BM_ForAllScaling(benchmark::State& state) {
  metamodel::ModelInstance inst;
  metamodel::Feature f;
  f.id = "f";
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    metamodel::Camera c;
    c.id = "camera" + std::to_string(i);
    c.width = 1920;
    c.height = 1280;
    f.cameras.push_back(c.id);
    inst.add(c);
  }
  inst.add(f);
  const auto doc = *ocl::parse_ocl(
                        "context Feature inv Res: cameras->forAll(c | c.width * c.height >= "
                        "2.1 * 1000000)")
                        .document;
  for (auto _ : state) benchmark::DoNotOptimize(ocl::check_all(doc, inst));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ForAllScaling)->RangeMultiplier(4)->Range(8, 2048)->Complexity();

}  // namespace
