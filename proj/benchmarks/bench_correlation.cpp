#include "multistitch/correlation.hpp"
#include "multistitch/features.hpp"
#include "multistitch/synth.hpp"

#include <benchmark/benchmark.h>

namespace ms = multistitch;

namespace {

ms::Image blob_scene(int w, int h) {
  ms::SceneSpec s;
  s.width = w;
  s.height = h;
  ms::TextureRegion r;
  r.kind = ms::TextureKind::BlobNoise;
  r.bounds = {0, 0, w, h};
  s.regions.push_back(r);
  return ms::generate_scene(s);
}

void BM_CorrelationSurface(benchmark::State& state) {
  const auto scene = blob_scene(400, 300);
  const auto a = scene.crop(0, 0, 256, 256);
  const auto b = scene.crop(100, 20, 256, 256);
  ms::HarrisParams hp;
  const auto features = ms::detect_features(a, hp, ms::Rect{156, 0, 100, 256});
  ms::CorrelationParams cp;
  cp.search_radius = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ms::correlation_surface(a, b, features, ms::Pixel(100, 20), cp));
  }
  state.counters["features"] = static_cast<double>(features.points.size());
}
BENCHMARK(BM_CorrelationSurface)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_HarrisDetect(benchmark::State& state) {
  const auto img = blob_scene(256, 256);
  ms::HarrisParams hp;
  for (auto _ : state) benchmark::DoNotOptimize(ms::detect_features(img, hp));
}
BENCHMARK(BM_HarrisDetect)->Unit(benchmark::kMillisecond);

}  // namespace
