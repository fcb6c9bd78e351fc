// Writes a small deterministic scene (frames, labels, per-combination
// predictions and an experiment config) for exercising the full grid without
// a trained detector.
//
//   vidcurate-synth <out-dir> [--frames N]

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "vidcurate/error.hpp"
#include "vidcurate/experiment.hpp"
#include "vidcurate/image_io.hpp"
#include "vidcurate/ingest.hpp"
#include "vidcurate/sampling.hpp"

namespace {

using namespace vidcurate;
namespace fs = std::filesystem;

constexpr int kWidth = 64;
constexpr int kHeight = 48;
constexpr ClassId kGrasper = 0;
constexpr ClassId kBean = 1;

struct SceneObject {
  ClassId class_id;
  BoundingBox box;
};

std::vector<SceneObject> objects_at(int t) {
  const int gx = t < 10 ? 4 + t : (t < 20 ? 13 + 3 * (t - 9) : 43 - 2 * (t - 19));
  const int gy = 10 + static_cast<int>(std::lround(3.0 * std::sin(t / 3.0)));
  const int bx = t < 15 ? 46 : (t <= 18 ? 46 - 2 * (t - 14) : 38);
  return {
      {kGrasper, BoundingBox{double(gx), double(gy), double(gx + 14), double(gy + 8)}},
      {kBean, BoundingBox{double(bx), 34.0, double(bx + 5), 39.0}},
  };
}

std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

image_io::RgbImage render(int t) {
  image_io::RgbImage img;
  img.width = kWidth;
  img.height = kHeight;
  img.pixels.resize(kWidth * kHeight * 3);
  const int light = t >= 22 && t <= 23 ? 25 : 0;  // brief lighting change
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      const int texture = static_cast<int>((x * 7919u + y * 104729u) % 13u);
      std::uint8_t* p = &img.pixels[(y * kWidth + x) * 3];
      p[0] = clamp8(120 + x + texture + light);
      p[1] = clamp8(100 + y + texture + light);
      p[2] = clamp8(90 + texture + light);
    }
  }
  for (const auto& o : objects_at(t)) {
    const std::uint8_t col[3] = {static_cast<std::uint8_t>(o.class_id == kGrasper ? 40 : 230),
                                 static_cast<std::uint8_t>(o.class_id == kGrasper ? 45 : 210),
                                 static_cast<std::uint8_t>(o.class_id == kGrasper ? 50 : 40)};
    for (int y = int(o.box.y_min); y < int(o.box.y_max); ++y)
      for (int x = int(o.box.x_min); x < int(o.box.x_max); ++x)
        for (int c = 0; c < 3; ++c) img.pixels[(y * kWidth + x) * 3 + c] = col[c];
  }
  return img;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Portable draws from mt19937_64 (the <random> distributions are not portable).
struct Draw {
  std::mt19937_64 rng;
  double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = std::max(uniform(), 1e-12);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

double r2(double v) { return std::round(v * 100.0) / 100.0; }

PredictionSet fake_detector(const SamplingPlan& plan, std::size_t n, std::string_view stem) {
  Draw d{std::mt19937_64(fnv1a(stem))};
  PredictionSet preds(n);
  const double p = plan.fraction;
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t gap = n;
    for (FrameIndex s : plan.selected) gap = std::min(gap, s > t ? s - t : t - s);
    const double g = static_cast<double>(std::min<std::size_t>(gap, 6));
    for (const auto& o : objects_at(static_cast<int>(t))) {
      const double miss = 0.03 + 0.06 * g * (1.0 - p);
      if (d.uniform() < miss) continue;
      const double sigma = 0.4 + 0.9 * g * (1.0 - p);
      BoundingBox b{r2(o.box.x_min + sigma * d.normal()), r2(o.box.y_min + sigma * d.normal()),
                    r2(o.box.x_max + sigma * d.normal()), r2(o.box.y_max + sigma * d.normal())};
      b.x_min = std::clamp(b.x_min, 0.0, kWidth - 1.0);
      b.y_min = std::clamp(b.y_min, 0.0, kHeight - 1.0);
      b.x_max = std::clamp(b.x_max, b.x_min + 1.0, double(kWidth));
      b.y_max = std::clamp(b.y_max, b.y_min + 1.0, double(kHeight));
      const double conf = r2(std::clamp(0.95 - 0.06 * g - 0.1 * d.uniform(), 0.05, 0.99));
      preds.frames[t].push_back(Prediction{t, o.class_id, b, conf});
    }
    if (d.uniform() < 0.35 * (1.0 - p)) {
      const double x = r2(d.uniform() * (kWidth - 12));
      const double y = r2(d.uniform() * (kHeight - 8));
      const double conf = r2(0.05 + 0.35 * d.uniform());
      preds.frames[t].push_back(Prediction{t, kGrasper, BoundingBox{x, y, x + 10, y + 6}, conf});
    }
  }
  return preds;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
  if (!out) throw Error(Errc::IoError, "cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic grid fixture"};
  std::string out_dir;
  int frames = 30;
  app.add_option("out", out_dir, "Output directory")->required();
  app.add_option("--frames", frames, "Frame count")->check(CLI::Range(2, 10000));
  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path root(out_dir);
    fs::create_directories(root / "frames");
    fs::create_directories(root / "labels");
    fs::create_directories(root / "preds");

    for (int t = 0; t < frames; ++t) {
      const std::string stem = fmt::format("frame_{:04d}", t);
      image_io::write_bmp(root / "frames" / (stem + ".bmp"), render(t));
      std::string lines;
      for (const auto& o : objects_at(t)) {
        lines += format_label_line(o.class_id, o.box, kWidth, kHeight) + "\n";
      }
      write_text(root / "labels" / (stem + ".txt"), lines);
    }
    write_text(root / "labels" / kClassNamesFile, "grasper\nbean\n");

    const std::string cfg_text =
        "# synthetic grid: 30 frames, grasper (0) and bean (1)\n"
        "frames = frames\n"
        "labels = labels\n"
        "preds = preds\n"
        "strategy = uniform, frame_diff, random\n"
        "fraction = 0.1, 0.2, 0.333, 0.5\n"
        "runs = 5\n"
        "conf_min = 0\n"
        "pairs = all_pairs\n"
        "class = 0\n";
    write_text(root / "experiment.cfg", cfg_text);

    ExperimentConfig cfg;
    apply_config_text(cfg, cfg_text, root);
    const FrameSequence seq = load_sequence(cfg.frames);
    const DiffSeries diffs = frame_diff_series(seq);
    for (const auto& combo : expand_grid(cfg)) {
      const SamplingPlan plan = make_plan(combo, seq.size(), &diffs);
      write_predictions(root / "preds" / (combo.stem() + ".preds"),
                        fake_detector(plan, seq.size(), combo.stem()));
    }
    std::cout << fmt::format("wrote {} frames to {}\n", frames, root.string());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
