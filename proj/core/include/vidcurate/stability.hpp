#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "vidcurate/metrics.hpp"
#include "vidcurate/types.hpp"

namespace vidcurate {

enum class PairMode { all_pairs, consecutive };

std::string_view to_string(PairMode m) noexcept;
/// "all_pairs" / "all" or "consecutive". Errc::ConfigError otherwise.
PairMode parse_pair_mode(std::string_view name);

/// Mean absolute intensity difference per pixel. Errc::DimensionMismatch on size mismatch.
double frame_distance(const GrayFrame& a, const GrayFrame& b);

struct QuotientSample {
  FrameIndex i = 0;
  FrameIndex j = 0;
  double numerator = 0;    // |f(x_i) - f(x_j)|
  double denominator = 0;  // frame distance
  double quotient = 0;
};

struct QuotientSet {
  std::vector<QuotientSample> samples;
  std::size_t dropped_zero_denominator = 0;
  PairMode mode = PairMode::all_pairs;
};

/// Distance between the frames at two curve positions. Called concurrently
/// for large pair sets, so it must be safe to call from several threads.
using DistanceFn = std::function<double(FrameIndex, FrameIndex)>;

/// Quotients |f_i - f_j| / d(i, j) over the curve's frames. all_pairs takes every
/// pair of curve positions p < q; consecutive takes neighbouring positions
/// (q = p + 1). Zero-distance pairs are dropped and counted.
/// Errc::SequenceTooShort for fewer than 2 curve points.
QuotientSet lipschitz_quotients(const IoUCurve& curve, const DistanceFn& distance, PairMode mode);

/// Same, with d = frame_distance over `grays`, looked up by frame index.
QuotientSet lipschitz_quotients(const IoUCurve& curve, std::span<const GrayFrame> grays,
                                PairMode mode);

inline constexpr std::array<double, 4> kReportLevels{50, 90, 95, 99};

/// Linear-interpolation quantile of sorted values at percent level q:
/// h = (n-1) q / 100, v[floor h] + frac(h) (v[floor h + 1] - v[floor h]).
double quantile_sorted(std::span<const double> sorted, double level);

struct LipschitzReport {
  PairMode mode = PairMode::all_pairs;
  std::vector<double> levels;
  std::vector<double> values;  // K at each level, same order
  std::size_t sample_count = 0;
  std::size_t dropped_zero_denominator = 0;

  /// K for a level present in `levels`; Errc::RangeError otherwise.
  [[nodiscard]] double at(double level) const;
};

/// Errc::NoSamples when the set retained nothing.
LipschitzReport quantiles(const QuotientSet& set,
                          std::span<const double> levels = kReportLevels);
LipschitzReport quantiles(std::span<const double> quotient_values,
                          std::span<const double> levels = kReportLevels);

}  // namespace vidcurate
