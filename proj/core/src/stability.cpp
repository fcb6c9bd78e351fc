#include "vidcurate/stability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>
#include <unordered_map>

#include "vidcurate/error.hpp"

namespace vidcurate {

namespace {
constexpr std::size_t kParallelPairs = 4096;
}

std::string_view to_string(PairMode m) noexcept {
  return m == PairMode::consecutive ? "consecutive" : "all_pairs";
}

PairMode parse_pair_mode(std::string_view name) {
  if (name == "all_pairs" || name == "all") return PairMode::all_pairs;
  if (name == "consecutive") return PairMode::consecutive;
  throw Error(Errc::ConfigError, fmt::format("unknown pair mode '{}'", name));
}

double frame_distance(const GrayFrame& a, const GrayFrame& b) {
  if (a.width != b.width || a.height != b.height || a.intensities.size() != b.intensities.size()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("frames {} and {} differ in size", a.index, b.index));
  }
  if (a.intensities.empty()) return 0.0;
  std::uint64_t sum = 0;
  for (std::size_t p = 0; p < a.intensities.size(); ++p) {
    const int d = static_cast<int>(a.intensities[p]) - static_cast<int>(b.intensities[p]);
    sum += static_cast<std::uint64_t>(d < 0 ? -d : d);
  }
  return static_cast<double>(sum) / static_cast<double>(a.intensities.size());
}

QuotientSet lipschitz_quotients(const IoUCurve& curve, const DistanceFn& distance, PairMode mode) {
  const std::size_t n = curve.values.size();
  if (n < 2 || curve.frames.size() != n) {
    throw Error(Errc::SequenceTooShort, fmt::format("need >= 2 curve points, got {}", n));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (mode == PairMode::all_pairs) {
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) pairs.emplace_back(p, q);
  } else {
    for (std::size_t p = 0; p + 1 < n; ++p) pairs.emplace_back(p, p + 1);
  }

  std::vector<double> dist(pairs.size());
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      dist[k] = distance(curve.frames[pairs[k].first], curve.frames[pairs[k].second]);
  };
  const std::size_t workers =
      pairs.size() < kParallelPairs ? 1 : std::max(1u, std::thread::hardware_concurrency());
  if (workers == 1) {
    fill(0, pairs.size());
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (pairs.size() + workers - 1) / workers;
    for (std::size_t b = 0; b < pairs.size(); b += chunk)
      jobs.push_back(std::async(std::launch::async, fill, b, std::min(pairs.size(), b + chunk)));
    for (auto& j : jobs) j.get();
  }

  QuotientSet out;
  out.mode = mode;
  out.samples.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [p, q] = pairs[k];
    const double den = dist[k];
    if (!(den > 0.0)) {
      ++out.dropped_zero_denominator;
      continue;
    }
    const double num = std::abs(curve.values[p] - curve.values[q]);
    out.samples.push_back({curve.frames[p], curve.frames[q], num, den, num / den});
  }
  return out;
}

QuotientSet lipschitz_quotients(const IoUCurve& curve, std::span<const GrayFrame> grays,
                                PairMode mode) {
  std::unordered_map<FrameIndex, const GrayFrame*> by_index;
  for (const auto& g : grays) by_index.emplace(g.index, &g);
  for (FrameIndex f : curve.frames) {
    if (by_index.find(f) == by_index.end()) {
      throw Error(Errc::RangeError, fmt::format("curve frame {} has no grayscale frame", f));
    }
  }
  return lipschitz_quotients(
      curve,
      [&](FrameIndex a, FrameIndex b) { return frame_distance(*by_index.at(a), *by_index.at(b)); },
      mode);
}

double quantile_sorted(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw Error(Errc::NoSamples, "quantile of an empty sample");
  if (!(level >= 0.0 && level <= 100.0)) {
    throw Error(Errc::RangeError, fmt::format("quantile level {} outside [0, 100]", level));
  }
  const double h = static_cast<double>(sorted.size() - 1) * level / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double v = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  // Rounding must not step outside the bracketing samples, or K would lose
  // monotonicity in the level.
  return std::clamp(v, sorted[lo], sorted[lo + 1]);
}

double LipschitzReport::at(double level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return values[i];
  }
  throw Error(Errc::RangeError, fmt::format("level {} not in report", level));
}

LipschitzReport quantiles(std::span<const double> quotient_values, std::span<const double> levels) {
  if (quotient_values.empty()) throw Error(Errc::NoSamples, "no retained quotient samples");
  std::vector<double> sorted(quotient_values.begin(), quotient_values.end());
  std::sort(sorted.begin(), sorted.end());
  LipschitzReport r;
  r.levels.assign(levels.begin(), levels.end());
  r.sample_count = sorted.size();
  for (double q : levels) r.values.push_back(quantile_sorted(sorted, q));
  return r;
}

LipschitzReport quantiles(const QuotientSet& set, std::span<const double> levels) {
  std::vector<double> v;
  v.reserve(set.samples.size());
  for (const auto& s : set.samples) v.push_back(s.quotient);
  if (v.empty()) {
    throw Error(Errc::NoSamples, fmt::format("all {} pairs had zero frame distance",
                                             set.dropped_zero_denominator));
  }
  LipschitzReport r = quantiles(std::span<const double>(v), levels);
  r.mode = set.mode;
  r.dropped_zero_denominator = set.dropped_zero_denominator;
  return r;
}

}  // namespace vidcurate
