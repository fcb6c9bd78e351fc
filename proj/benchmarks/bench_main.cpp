#include <benchmark/benchmark.h>

#include <random>

#include "vidcurate/metrics.hpp"
#include "vidcurate/sampling.hpp"
#include "vidcurate/stability.hpp"

namespace {

using namespace vidcurate;

std::vector<GrayFrame> random_frames(std::size_t n, int w, int h) {
  std::mt19937_64 rng(42);
  std::vector<GrayFrame> out;
  for (std::size_t i = 0; i < n; ++i) {
    GrayFrame g{i, w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h))};
    for (auto& px : g.intensities) px = static_cast<std::uint8_t>(rng());
    out.push_back(std::move(g));
  }
  return out;
}

void BM_FrameDiffSeries(benchmark::State& state) {
  const auto frames = random_frames(static_cast<std::size_t>(state.range(0)), 320, 240);
  for (auto _ : state) benchmark::DoNotOptimize(frame_diff_series(frames));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FrameDiffSeries)->Arg(30)->Arg(140);

void BM_AllPairsQuotients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto frames = random_frames(n, 160, 120);
  IoUCurve curve;
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < n; ++i) {
    curve.frames.push_back(i);
    curve.values.push_back(static_cast<double>(rng() % 1000) / 1000.0);
  }
  for (auto _ : state) {
    auto set = lipschitz_quotients(curve, frames, PairMode::all_pairs);
    benchmark::DoNotOptimize(quantiles(set));
  }
}
BENCHMARK(BM_AllPairsQuotients)->Arg(70)->Arg(140)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  PredictionSet preds(frames);
  AnnotationSet gts(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    for (int k = 0; k < 4; ++k) {
      const double x = static_cast<double>(rng() % 500), y = static_cast<double>(rng() % 300);
      gts.frames[f].push_back({f, k % 2, {x, y, x + 40, y + 30}});
      preds.frames[f].push_back({f, k % 2, {x + 3, y - 2, x + 41, y + 29}, double(rng() % 100) / 100});
      preds.frames[f].push_back({f, k % 2, {y, x, y + 20, x + 20}, double(rng() % 100) / 100});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(preds, gts));
}
BENCHMARK(BM_Evaluate)->Arg(140)->Arg(1000);

}  // namespace
BENCHMARK_MAIN();
