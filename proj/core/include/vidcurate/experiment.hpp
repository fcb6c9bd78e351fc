#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vidcurate/metrics.hpp"
#include "vidcurate/sampling.hpp"
#include "vidcurate/stability.hpp"
#include "vidcurate/types.hpp"

namespace vidcurate {

/// Settings for one experiment grid (strategies x fractions x seeds).
struct ExperimentConfig {
  std::filesystem::path frames;
  std::filesystem::path labels;
  std::filesystem::path preds;  // directory of <combination>.preds files
  std::filesystem::path out = "out";
  std::vector<Strategy> strategies{Strategy::uniform, Strategy::frame_diff};
  std::vector<double> fractions{0.5, 0.333, 0.2, 0.1, 0.05};
  std::vector<std::uint64_t> seeds;  // empty: 1..runs
  std::size_t runs = 5;
  double conf_min = 0.0;
  double iou_threshold = kMatchIou;
  PairMode pairs = PairMode::all_pairs;
  ClassId target_class = 0;
  double fps = kDefaultFps;
  bool emit_list = false;
  bool dump_quotients = false;

  /// Seeds used for the random strategy.
  [[nodiscard]] std::vector<std::uint64_t> random_seeds() const;
};

/// Applies `key = value` lines (# comments, blank lines ignored) onto `config`.
/// Relative paths resolve against `base_dir`. Errc::ConfigError on unknown keys
/// or bad values.
void apply_config_text(ExperimentConfig& config, std::string_view text,
                       const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Single `key=value` assignment, the same keys as the config file.
void apply_config_value(ExperimentConfig& config, std::string_view key, std::string_view value,
                        const std::filesystem::path& base_dir = {});

/// Errc::ConfigError for fractions outside (0,1], runs == 0, empty strategy list.
void validate(const ExperimentConfig& config);

struct Combination {
  Strategy strategy = Strategy::uniform;
  double fraction = 1.0;
  std::optional<std::uint64_t> seed;

  /// `<strategy>_p<P>_s<seed|->`
  [[nodiscard]] std::string stem() const;
};

/// Grid in summary order: strategy group, ascending P, ascending seed.
std::vector<Combination> expand_grid(const ExperimentConfig& config);

/// Builds the plan for one combination; `diffs` is required for frame_diff.
SamplingPlan make_plan(const Combination& combo, std::size_t total_frames, const DiffSeries* diffs);

struct CommandOutcome {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> failures;  // "<combination>: <error>"

  /// 0 when every combination succeeded, 2 otherwise.
  [[nodiscard]] int exit_code() const noexcept { return failures.empty() ? 0 : 2; }
};

/// One plan file per combination (plus `.list` files with emit_list).
CommandOutcome cmd_sample(const ExperimentConfig& config);
/// Per-combination eval reports plus eval_summary.txt / eval_summary.kv.
CommandOutcome cmd_eval(const ExperimentConfig& config);
/// Per-combination Lipschitz reports over held-out frames plus lipschitz_summary.{txt,kv}.
CommandOutcome cmd_lipschitz(const ExperimentConfig& config);
/// `t D_t` lines for a frame directory. Errc::SequenceTooShort for N < 2.
std::string cmd_diffplot(const std::filesystem::path& frames);

}  // namespace vidcurate
