#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidcurate/types.hpp"

namespace vidcurate {

enum class Strategy { uniform, frame_diff, random };

std::string_view to_string(Strategy s) noexcept;
/// Accepts "uniform", "frame_diff" (alias "diff"), "random". Errc::ConfigError otherwise.
Strategy parse_strategy(std::string_view name);

struct SamplingPlan {
  Strategy strategy = Strategy::uniform;
  double fraction = 1.0;
  std::optional<std::uint64_t> seed;  // random only
  std::vector<FrameIndex> selected;   // strictly increasing, within [0, total_frames)
  std::size_t total_frames = 0;

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

/// D_t for t = 1..N-1; values[t-1] holds D_t, attributed to the later frame t.
struct DiffSeries {
  std::vector<std::uint64_t> values;
  std::size_t total_frames = 0;

  [[nodiscard]] std::uint64_t at(FrameIndex t) const { return values.at(t - 1); }
};

/// Every floor(1/P)-th frame starting at 0.
SamplingPlan uniform_sample(std::size_t total_frames, double fraction);

/// Uniform plan size, ceil(N / floor(1/P)).
std::size_t uniform_cardinality(std::size_t total_frames, double fraction);

/// round(P * N), half away from zero.
std::size_t budget_size(std::size_t total_frames, double fraction);

/// Sum of absolute grayscale differences between consecutive frames.
/// Errc::SequenceTooShort when fewer than 2 frames; DimensionMismatch on size change.
DiffSeries frame_diff_series(std::span<const GrayFrame> grays);
DiffSeries frame_diff_series(const FrameSequence& seq);

/// Top round(P*N) frames by D_t (ties: smaller index first); frame 0 is never
/// eligible, so at most N-1 frames are returned. Errc::EmptyBudget when k = 0.
SamplingPlan diff_sample(const DiffSeries& diffs, double fraction);

/// round(P*N) indices without replacement from a seeded mt19937_64 stream via
/// partial Fisher-Yates with rejection-sampled bounded integers, so plans are
/// identical on every platform. Errc::EmptyBudget when k = 0.
SamplingPlan random_sample(std::size_t total_frames, double fraction, std::uint64_t seed);

/// Header line `# strategy=<s> fraction=<P> seed=<seed|-> total=<N>` followed by one
/// index per line.
void export_plan(const SamplingPlan& plan, const std::filesystem::path& path);
SamplingPlan import_plan(const std::filesystem::path& path);
std::string serialize_plan(const SamplingPlan& plan);
SamplingPlan parse_plan(std::string_view text, std::string_view origin = "<plan>");

/// Writes the selected frames' file names, one per line.
void export_plan_list(const SamplingPlan& plan, std::span<const std::filesystem::path> frame_files,
                      const std::filesystem::path& path);

/// Shortest round-trip decimal for a fraction, used in headers and file names.
std::string format_fraction(double fraction);

/// Throws Errc::InvalidFraction unless 0 < fraction <= 1.
void check_fraction(double fraction);

}  // namespace vidcurate
