#include "vidcurate/sampling.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "vidcurate/error.hpp"
#include "vidcurate/ingest.hpp"

namespace vidcurate {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::uniform: return "uniform";
    case Strategy::frame_diff: return "frame_diff";
    case Strategy::random: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "uniform") return Strategy::uniform;
  if (name == "frame_diff" || name == "diff") return Strategy::frame_diff;
  if (name == "random") return Strategy::random;
  throw Error(Errc::ConfigError, fmt::format("unknown strategy '{}'", name));
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(Errc::InvalidFraction, fmt::format("fraction {} not in (0, 1]", fraction));
  }
}

std::string format_fraction(double fraction) { return fmt::format("{}", fraction); }

namespace {

// The 1e-9 slack keeps decimal budgets such as 0.05 or 1/3 on their intended
// stride despite binary rounding of 1/P.
std::size_t stride_for(double fraction) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(1.0 / fraction + 1e-9)));
}

}  // namespace

std::size_t uniform_cardinality(std::size_t total_frames, double fraction) {
  check_fraction(fraction);
  const std::size_t s = stride_for(fraction);
  return (total_frames + s - 1) / s;
}

std::size_t budget_size(std::size_t total_frames, double fraction) {
  check_fraction(fraction);
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total_frames)));
}

SamplingPlan uniform_sample(std::size_t total_frames, double fraction) {
  check_fraction(fraction);
  if (total_frames == 0) throw Error(Errc::EmptySequence, "uniform_sample over zero frames");
  SamplingPlan plan;
  plan.strategy = Strategy::uniform;
  plan.fraction = fraction;
  plan.total_frames = total_frames;
  const std::size_t s = stride_for(fraction);
  for (std::size_t i = 0; i < total_frames; i += s) plan.selected.push_back(i);
  return plan;
}

DiffSeries frame_diff_series(std::span<const GrayFrame> grays) {
  if (grays.size() < 2) {
    throw Error(Errc::SequenceTooShort,
                fmt::format("frame difference needs >= 2 frames, got {}", grays.size()));
  }
  DiffSeries out;
  out.total_frames = grays.size();
  out.values.resize(grays.size() - 1);
  for (std::size_t t = 1; t < grays.size(); ++t) {
    const auto& prev = grays[t - 1].intensities;
    const auto& cur = grays[t].intensities;
    if (grays[t].width != grays[0].width || grays[t].height != grays[0].height ||
        prev.size() != cur.size()) {
      throw Error(Errc::DimensionMismatch, fmt::format("frame {} differs in size", t));
    }
    std::uint64_t sum = 0;
    for (std::size_t p = 0; p < cur.size(); ++p) {
      sum += static_cast<std::uint64_t>(cur[p] > prev[p] ? cur[p] - prev[p] : prev[p] - cur[p]);
    }
    out.values[t - 1] = sum;
  }
  return out;
}

DiffSeries frame_diff_series(const FrameSequence& seq) {
  if (seq.size() < 2) {
    throw Error(Errc::SequenceTooShort,
                fmt::format("frame difference needs >= 2 frames, got {}", seq.size()));
  }
  const auto grays = to_grayscale(seq);
  return frame_diff_series(grays);
}

SamplingPlan diff_sample(const DiffSeries& diffs, double fraction) {
  check_fraction(fraction);
  const std::size_t n = diffs.total_frames;
  const std::size_t k = budget_size(n, fraction);
  if (k == 0) {
    throw Error(Errc::EmptyBudget, fmt::format("round({} * {}) = 0 frames", fraction, n));
  }
  std::vector<FrameIndex> order(diffs.values.size());
  std::iota(order.begin(), order.end(), FrameIndex{1});
  // stable_sort keeps ascending index among equal D_t.
  std::stable_sort(order.begin(), order.end(), [&](FrameIndex a, FrameIndex b) {
    return diffs.values[a - 1] > diffs.values[b - 1];
  });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());

  SamplingPlan plan;
  plan.strategy = Strategy::frame_diff;
  plan.fraction = fraction;
  plan.total_frames = n;
  plan.selected = std::move(order);
  return plan;
}

SamplingPlan random_sample(std::size_t total_frames, double fraction, std::uint64_t seed) {
  check_fraction(fraction);
  if (total_frames == 0) throw Error(Errc::EmptySequence, "random_sample over zero frames");
  const std::size_t k = budget_size(total_frames, fraction);
  if (k == 0) {
    throw Error(Errc::EmptyBudget, fmt::format("round({} * {}) = 0 frames", fraction, total_frames));
  }
  // mt19937_64's output sequence is fixed by the standard; the distributions in
  // <random> are not, hence the explicit bounded draw.
  std::mt19937_64 rng(seed);
  auto bounded = [&rng](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };

  std::vector<FrameIndex> pool(total_frames);
  std::iota(pool.begin(), pool.end(), FrameIndex{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(total_frames - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());

  SamplingPlan plan;
  plan.strategy = Strategy::random;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.total_frames = total_frames;
  plan.selected = std::move(pool);
  return plan;
}

std::string serialize_plan(const SamplingPlan& plan) {
  std::string out = fmt::format("# strategy={} fraction={} seed={} total={}\n",
                                to_string(plan.strategy), format_fraction(plan.fraction),
                                plan.seed ? std::to_string(*plan.seed) : std::string("-"),
                                plan.total_frames);
  for (FrameIndex i : plan.selected) {
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

namespace {

template <class T>
T parse_field(std::string_view value, std::string_view key, std::string_view origin) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(Errc::ParseError, fmt::format("{}: bad {} '{}'", origin, key, value));
  }
  return out;
}

}  // namespace

SamplingPlan parse_plan(std::string_view text, std::string_view origin) {
  SamplingPlan plan;
  bool have_header = false;
  bool have_strategy = false, have_fraction = false, have_seed = false, have_total = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!have_header) {
      if (line.substr(0, 2) != "# ") {
        throw Error(Errc::ParseError, fmt::format("{}:{}: missing plan header", origin, line_no));
      }
      have_header = true;
      std::string_view rest = line.substr(2);
      while (!rest.empty()) {
        const std::size_t sp = rest.find(' ');
        std::string_view kv = rest.substr(0, sp);
        rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
        if (kv.empty()) continue;
        const std::size_t eq = kv.find('=');
        if (eq == std::string_view::npos) {
          throw Error(Errc::ParseError, fmt::format("{}:{}: bad header token '{}'", origin, line_no, kv));
        }
        const std::string_view key = kv.substr(0, eq);
        const std::string_view value = kv.substr(eq + 1);
        if (key == "strategy") {
          try {
            plan.strategy = parse_strategy(value);
          } catch (const Error&) {
            throw Error(Errc::ParseError, fmt::format("{}: unknown strategy '{}'", origin, value));
          }
          have_strategy = true;
        } else if (key == "fraction") {
          plan.fraction = parse_field<double>(value, key, origin);
          have_fraction = true;
        } else if (key == "seed") {
          if (value != "-") plan.seed = parse_field<std::uint64_t>(value, key, origin);
          have_seed = true;
        } else if (key == "total") {
          plan.total_frames = parse_field<std::size_t>(value, key, origin);
          have_total = true;
        }
      }
      if (!(have_strategy && have_fraction && have_seed && have_total)) {
        throw Error(Errc::ParseError, fmt::format("{}: incomplete plan header", origin));
      }
      continue;
    }
    const auto idx = parse_field<FrameIndex>(line, "frame index", origin);
    if (idx >= plan.total_frames || (!plan.selected.empty() && idx <= plan.selected.back())) {
      throw Error(Errc::RangeError,
                  fmt::format("{}:{}: index {} out of order or range", origin, line_no, idx));
    }
    plan.selected.push_back(idx);
  }
  if (!have_header) throw Error(Errc::ParseError, fmt::format("{}: empty plan file", origin));
  check_fraction(plan.fraction);
  if (plan.selected.empty()) throw Error(Errc::EmptyBudget, fmt::format("{}: plan selects nothing", origin));
  return plan;
}

void export_plan(const SamplingPlan& plan, const std::filesystem::path& path) {
  if (plan.selected.empty()) throw Error(Errc::EmptyBudget, "refusing to export an empty plan");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write plan: " + path.string());
  const std::string text = serialize_plan(plan);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

SamplingPlan import_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read plan: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str(), path.string());
}

void export_plan_list(const SamplingPlan& plan, std::span<const std::filesystem::path> frame_files,
                      const std::filesystem::path& path) {
  if (frame_files.size() != plan.total_frames) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("plan covers {} frames but {} files given", plan.total_frames,
                            frame_files.size()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write list: " + path.string());
  for (FrameIndex i : plan.selected) out << frame_files[i].filename().string() << '\n';
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

}  // namespace vidcurate
