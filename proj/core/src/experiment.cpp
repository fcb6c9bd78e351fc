#include "vidcurate/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "vidcurate/error.hpp"
#include "vidcurate/ingest.hpp"
#include "vidcurate/report.hpp"

namespace vidcurate {

namespace fs = std::filesystem;

std::vector<std::uint64_t> ExperimentConfig::random_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out(runs);
  std::iota(out.begin(), out.end(), std::uint64_t{1});
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::ConfigError, fmt::format("bad value '{}' for {}", text, key));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw Error(Errc::ConfigError, fmt::format("bad boolean '{}' for {}", text, key));
}

fs::path resolve(const fs::path& base, std::string_view value) {
  fs::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

bool needs_diffs(const ExperimentConfig& c) {
  return std::find(c.strategies.begin(), c.strategies.end(), Strategy::frame_diff) !=
         c.strategies.end();
}

void prepare_out(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + config.out.string() + ": " + ec.message());
}

void require_path(const fs::path& p, std::string_view what) {
  if (p.empty()) throw Error(Errc::ConfigError, fmt::format("missing {} path", what));
  if (!fs::exists(p)) throw Error(Errc::ConfigError, fmt::format("{} not found: {}", what, p.string()));
}

using GroupKey = std::pair<Strategy, double>;

}  // namespace

void apply_config_value(ExperimentConfig& c, std::string_view raw_key, std::string_view raw_value,
                        const fs::path& base_dir) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string_view value = trim(raw_value);

  if (key == "frames") {
    c.frames = resolve(base_dir, value);
  } else if (key == "labels") {
    c.labels = resolve(base_dir, value);
  } else if (key == "preds") {
    c.preds = resolve(base_dir, value);
  } else if (key == "out") {
    c.out = resolve(base_dir, value);
  } else if (key == "strategy" || key == "strategies") {
    c.strategies.clear();
    for (auto s : split_list(value)) c.strategies.push_back(parse_strategy(s));
  } else if (key == "fraction" || key == "fractions") {
    c.fractions.clear();
    for (auto s : split_list(value)) c.fractions.push_back(parse_value<double>(key, s));
  } else if (key == "seed" || key == "seeds") {
    c.seeds.clear();
    for (auto s : split_list(value)) c.seeds.push_back(parse_value<std::uint64_t>(key, s));
  } else if (key == "runs") {
    c.runs = parse_value<std::size_t>(key, value);
  } else if (key == "conf_min") {
    c.conf_min = parse_value<double>(key, value);
  } else if (key == "iou") {
    c.iou_threshold = parse_value<double>(key, value);
  } else if (key == "pairs") {
    c.pairs = parse_pair_mode(value);
  } else if (key == "class") {
    c.target_class = parse_value<ClassId>(key, value);
  } else if (key == "fps") {
    c.fps = parse_value<double>(key, value);
  } else if (key == "emit_list") {
    c.emit_list = parse_bool(key, value);
  } else if (key == "dump_quotients") {
    c.dump_quotients = parse_bool(key, value);
  } else {
    throw Error(Errc::ConfigError, fmt::format("unknown config key '{}'", raw_key));
  }
}

void apply_config_text(ExperimentConfig& config, std::string_view text, const fs::path& base_dir) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::ConfigError, fmt::format("line {}: expected key = value", line_no));
    }
    try {
      apply_config_value(config, line.substr(0, eq), line.substr(eq + 1), base_dir);
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, fmt::format("line {}: {}", line_no, e.what()));
    }
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ExperimentConfig config;
  apply_config_text(config, ss.str(), path.parent_path());
  return config;
}

void validate(const ExperimentConfig& c) {
  if (c.strategies.empty()) throw Error(Errc::ConfigError, "no strategies configured");
  if (c.fractions.empty()) throw Error(Errc::ConfigError, "no fractions configured");
  for (double f : c.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(Errc::ConfigError, fmt::format("fraction {} not in (0, 1]", f));
    }
  }
  if (c.runs == 0) throw Error(Errc::ConfigError, "runs must be >= 1");
  if (!(c.iou_threshold > 0.0 && c.iou_threshold < 1.0)) {
    throw Error(Errc::ConfigError, "iou threshold must be in (0, 1)");
  }
  if (!(c.fps > 0.0)) throw Error(Errc::ConfigError, "fps must be positive");
}

std::string Combination::stem() const {
  return fmt::format("{}_p{}_s{}", to_string(strategy), format_fraction(fraction),
                     seed ? std::to_string(*seed) : std::string("-"));
}

std::vector<Combination> expand_grid(const ExperimentConfig& config) {
  std::vector<Strategy> strategies;
  for (Strategy s : {Strategy::uniform, Strategy::frame_diff, Strategy::random}) {
    if (std::find(config.strategies.begin(), config.strategies.end(), s) != config.strategies.end()) {
      strategies.push_back(s);
    }
  }
  std::vector<double> fractions = config.fractions;
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());
  std::vector<std::uint64_t> seeds = config.random_seeds();
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<Combination> grid;
  for (Strategy s : strategies) {
    for (double f : fractions) {
      if (s == Strategy::random) {
        for (auto seed : seeds) grid.push_back({s, f, seed});
      } else {
        grid.push_back({s, f, std::nullopt});
      }
    }
  }
  return grid;
}

SamplingPlan make_plan(const Combination& combo, std::size_t total_frames, const DiffSeries* diffs) {
  switch (combo.strategy) {
    case Strategy::uniform:
      return uniform_sample(total_frames, combo.fraction);
    case Strategy::frame_diff:
      if (diffs == nullptr) throw Error(Errc::SequenceTooShort, "frame_diff needs a difference series");
      return diff_sample(*diffs, combo.fraction);
    case Strategy::random:
      return random_sample(total_frames, combo.fraction, combo.seed.value_or(1));
  }
  throw Error(Errc::ConfigError, "unknown strategy");
}

namespace {

/// Shared inputs, loaded once per command.
struct Workspace {
  FrameSequence seq;
  std::vector<fs::path> files;
  std::optional<DiffSeries> diffs;
  std::string diff_error;

  const DiffSeries* diff_ptr() const {
    if (!diffs) throw Error(Errc::SequenceTooShort, diff_error);
    return &*diffs;
  }
};

Workspace open_workspace(const ExperimentConfig& config, bool want_diffs) {
  require_path(config.frames, "frames");
  Workspace ws;
  ws.seq = load_sequence(config.frames, config.fps);
  ws.files.reserve(ws.seq.size());
  for (const auto& f : ws.seq.frames) ws.files.push_back(f.source);
  if (want_diffs) {
    try {
      ws.diffs = frame_diff_series(ws.seq);
    } catch (const Error& e) {
      ws.diff_error = e.what();
    }
  }
  return ws;
}

std::string failure_line(const Combination& combo, const std::exception& e) {
  return fmt::format("{}: {}", combo.stem(), e.what());
}

PredictionSet load_combo_predictions(const ExperimentConfig& config, const Combination& combo,
                                     std::size_t frame_count) {
  const fs::path p = config.preds / (combo.stem() + ".preds");
  if (!fs::exists(p)) {
    throw Error(Errc::MissingPredictions,
                fmt::format("no predictions for {} (expected {})", combo.stem(), p.string()));
  }
  return load_predictions(p, frame_count);
}

}  // namespace

CommandOutcome cmd_sample(const ExperimentConfig& config) {
  validate(config);
  Workspace ws = open_workspace(config, needs_diffs(config));
  prepare_out(config);
  CommandOutcome outcome;
  for (const auto& combo : expand_grid(config)) {
    try {
      const SamplingPlan plan =
          make_plan(combo, ws.seq.size(), combo.strategy == Strategy::frame_diff ? ws.diff_ptr() : nullptr);
      const fs::path plan_path = config.out / (combo.stem() + ".plan");
      export_plan(plan, plan_path);
      outcome.written.push_back(plan_path);
      if (config.emit_list) {
        const fs::path list_path = config.out / (combo.stem() + ".list");
        export_plan_list(plan, ws.files, list_path);
        outcome.written.push_back(list_path);
      }
    } catch (const Error& e) {
      outcome.failures.push_back(failure_line(combo, e));
    }
  }
  return outcome;
}

CommandOutcome cmd_eval(const ExperimentConfig& config) {
  validate(config);
  require_path(config.labels, "labels");
  require_path(config.preds, "predictions");
  Workspace ws = open_workspace(config, needs_diffs(config));
  const AnnotationSet gts = load_annotations(config.labels, ws.seq);
  prepare_out(config);

  EvalOptions options{config.iou_threshold, config.conf_min};
  CommandOutcome outcome;
  std::map<GroupKey, std::vector<std::pair<EvalReport, std::size_t>>> groups;
  std::vector<GroupKey> order;

  for (const auto& combo : expand_grid(config)) {
    const GroupKey key{combo.strategy, combo.fraction};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
    try {
      const SamplingPlan plan = make_plan(
          combo, ws.seq.size(), combo.strategy == Strategy::frame_diff ? ws.diff_ptr() : nullptr);
      const PredictionSet preds = load_combo_predictions(config, combo, ws.seq.size());
      EvalReport rep = evaluate(preds, gts, options);
      const fs::path path = config.out / (combo.stem() + ".eval.txt");
      write_text(path, report::eval_kv(rep));
      outcome.written.push_back(path);
      groups[key].emplace_back(std::move(rep), plan.selected.size());
    } catch (const Error& e) {
      outcome.failures.push_back(failure_line(combo, e));
    }
  }

  std::vector<report::EvalRow> rows;
  for (const auto& key : order) {
    const auto it = groups.find(key);
    if (it == groups.end() || it->second.empty()) continue;
    report::EvalRow row;
    row.strategy = key.first;
    row.fraction = key.second;
    row.runs = it->second.size();
    for (const auto& [rep, labels] : it->second) {
      row.precision += rep.overall.precision;
      row.recall += rep.overall.recall;
      row.map += rep.map;
      row.labels += static_cast<double>(labels);
    }
    const auto n = static_cast<double>(row.runs);
    row.precision /= n;
    row.recall /= n;
    row.map /= n;
    row.labels /= n;
    rows.push_back(row);
  }
  report::sort_rows(rows);
  write_text(config.out / "eval_summary.txt", report::eval_table(rows, options));
  write_text(config.out / "eval_summary.kv", report::eval_summary_kv(rows));
  outcome.written.push_back(config.out / "eval_summary.txt");
  outcome.written.push_back(config.out / "eval_summary.kv");
  return outcome;
}

CommandOutcome cmd_lipschitz(const ExperimentConfig& config) {
  validate(config);
  require_path(config.labels, "labels");
  require_path(config.preds, "predictions");
  Workspace ws = open_workspace(config, needs_diffs(config));
  const AnnotationSet gts = load_annotations(config.labels, ws.seq);
  const std::vector<GrayFrame> grays = to_grayscale(ws.seq);
  prepare_out(config);

  CommandOutcome outcome;
  std::map<GroupKey, std::vector<LipschitzReport>> groups;
  std::vector<GroupKey> order;

  for (const auto& combo : expand_grid(config)) {
    const GroupKey key{combo.strategy, combo.fraction};
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
    try {
      const SamplingPlan plan = make_plan(
          combo, ws.seq.size(), combo.strategy == Strategy::frame_diff ? ws.diff_ptr() : nullptr);
      std::vector<FrameIndex> held_out;
      std::size_t next = 0;
      for (FrameIndex f = 0; f < ws.seq.size(); ++f) {
        if (next < plan.selected.size() && plan.selected[next] == f) {
          ++next;
        } else {
          held_out.push_back(f);
        }
      }
      const PredictionSet preds =
          filter_confidence(load_combo_predictions(config, combo, ws.seq.size()), config.conf_min);
      const IoUCurve curve = per_frame_iou_curve(preds, gts, config.target_class, held_out);
      const QuotientSet qs = lipschitz_quotients(curve, grays, config.pairs);
      LipschitzReport rep = quantiles(qs);

      const std::string stem = combo.stem();
      write_text(config.out / (stem + ".lipschitz.txt"), report::lipschitz_kv(rep, config.target_class));
      write_text(config.out / (stem + ".iou.txt"), report::iou_curve_text(curve));
      outcome.written.push_back(config.out / (stem + ".lipschitz.txt"));
      outcome.written.push_back(config.out / (stem + ".iou.txt"));
      if (config.dump_quotients) {
        write_text(config.out / (stem + ".quotients.txt"), report::quotients_text(qs));
        outcome.written.push_back(config.out / (stem + ".quotients.txt"));
      }
      groups[key].push_back(std::move(rep));
    } catch (const Error& e) {
      outcome.failures.push_back(failure_line(combo, e));
    }
  }

  std::vector<report::LipschitzRow> rows;
  for (const auto& key : order) {
    const auto it = groups.find(key);
    if (it == groups.end() || it->second.empty()) continue;
    report::LipschitzRow row;
    row.strategy = key.first;
    row.fraction = key.second;
    row.runs = it->second.size();
    row.levels = it->second.front().levels;
    row.values.assign(row.levels.size(), 0.0);
    for (const auto& rep : it->second) {
      for (std::size_t i = 0; i < row.values.size(); ++i) row.values[i] += rep.values[i];
    }
    for (double& v : row.values) v /= static_cast<double>(row.runs);
    rows.push_back(std::move(row));
  }
  report::sort_rows(rows);
  write_text(config.out / "lipschitz_summary.txt",
             report::lipschitz_table(rows, config.pairs, config.target_class));
  write_text(config.out / "lipschitz_summary.kv", report::lipschitz_summary_kv(rows));
  outcome.written.push_back(config.out / "lipschitz_summary.txt");
  outcome.written.push_back(config.out / "lipschitz_summary.kv");
  return outcome;
}

std::string cmd_diffplot(const fs::path& frames) {
  const FrameSequence seq = load_sequence(frames);
  return report::diff_series_text(frame_diff_series(seq));
}

}  // namespace vidcurate
