#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_util.hpp"
#include "vidcurate/error.hpp"
#include "vidcurate/experiment.hpp"
#include "vidcurate/image_io.hpp"
#include "vidcurate/ingest.hpp"
#include "vidcurate/report.hpp"

namespace vidcurate {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::TempDir;
using testing::write_file;

/// Ten 16x16 frames, one class-0 box per frame, plus a labels dir.
struct MiniDataset {
  TempDir dir{"vidcurate_exp"};
  fs::path frames = dir / "frames";
  fs::path labels = dir / "labels";
  fs::path preds = dir / "preds";
  static constexpr int kFrames = 10;

  MiniDataset() {
    fs::create_directories(frames);
    fs::create_directories(labels);
    fs::create_directories(preds);
    for (int i = 0; i < kFrames; ++i) {
      image_io::RgbImage img{16, 16, std::vector<std::uint8_t>(16 * 16 * 3, 0)};
      for (int p = 0; p < 16 * 16; ++p) {
        img.pixels[p * 3] = static_cast<std::uint8_t>((i * 23 + p) & 0xFF);
      }
      const std::string stem = fmt_stem(i);
      image_io::write_bmp(frames / (stem + ".bmp"), img);
      const std::vector<Annotation> a{{static_cast<FrameIndex>(i), 0, box()}};
      write_label_file(labels / (stem + ".txt"), a, 16, 16);
    }
  }

  static std::string fmt_stem(int i) { return "f" + std::to_string(100 + i); }
  static BoundingBox box() { return {2, 2, 10, 10}; }

  /// Predictions that hit the first `hits` frames with high confidence and
  /// miss the rest, so AP = hits / kFrames.
  void write_preds(const std::string& stem, int hits) const {
    PredictionSet p(kFrames);
    for (int i = 0; i < kFrames; ++i) {
      const auto f = static_cast<FrameIndex>(i);
      if (i < hits) {
        p.frames[f].push_back({f, 0, box(), 0.9});
      } else {
        p.frames[f].push_back({f, 0, {11, 11, 15, 15}, 0.5});
      }
    }
    write_predictions(preds / (stem + ".preds"), p);
  }

  ExperimentConfig config(const fs::path& out) const {
    ExperimentConfig c;
    c.frames = frames;
    c.labels = labels;
    c.preds = preds;
    c.out = out;
    return c;
  }
};

std::set<std::string> files_in(const fs::path& dir, const std::string& ext) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ext) out.insert(e.path().filename().string());
  }
  return out;
}

TEST(Config, ParsesFileAndResolvesPaths) {
  TempDir dir;
  write_file(dir / "exp.cfg",
             "# grid\n"
             "frames = seq\n"
             "labels=/abs/labels\n"
             "strategy = uniform, diff ,random\n"
             "fraction = 0.5,0.05\n"
             "runs = 3\n"
             "conf-min = 0.25   # trailing comment\n"
             "pairs = consecutive\n"
             "emit_list = true\n");
  const auto c = load_config(dir / "exp.cfg");
  EXPECT_EQ(c.frames, dir.path() / "seq");
  EXPECT_EQ(c.labels, fs::path("/abs/labels"));
  EXPECT_EQ(c.strategies,
            (std::vector<Strategy>{Strategy::uniform, Strategy::frame_diff, Strategy::random}));
  EXPECT_EQ(c.fractions, (std::vector<double>{0.5, 0.05}));
  EXPECT_EQ(c.random_seeds(), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(c.conf_min, 0.25);
  EXPECT_EQ(c.pairs, PairMode::consecutive);
  EXPECT_TRUE(c.emit_list);
}

TEST(Config, FlagsOverrideFile) {
  ExperimentConfig c;
  apply_config_text(c, "fraction = 0.5\nseed = 4,5\n", "/base");
  apply_config_value(c, "fraction", "0.1");
  apply_config_value(c, "seed", "9");
  EXPECT_EQ(c.fractions, std::vector<double>{0.1});
  EXPECT_EQ(c.random_seeds(), std::vector<std::uint64_t>{9});
}

TEST(Config, Errors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_config_text(c, "bogus = 1\n", {}), Error);
  EXPECT_THROW(apply_config_text(c, "just words\n", {}), Error);
  EXPECT_THROW(apply_config_text(c, "runs = many\n", {}), Error);
  EXPECT_THROW(apply_config_text(c, "strategy = clever\n", {}), Error);
  try {
    apply_config_text(c, "\n\nruns = x\n", {});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  for (const char* bad : {"fraction = 0", "fraction = 1.5", "runs = 0", "iou = 1"}) {
    ExperimentConfig v;
    apply_config_text(v, bad, {});
    EXPECT_THROW(validate(v), Error) << bad;
  }
  EXPECT_THROW(load_config("/nonexistent/exp.cfg"), Error);
}

TEST(Grid, ProductCounts) {
  ExperimentConfig c;
  c.fractions = {0.5, 0.333, 0.2, 0.1};
  EXPECT_EQ(expand_grid(c).size(), 8u);
  c.strategies = {Strategy::random};
  c.fractions = {0.2};
  const auto g = expand_grid(c);
  ASSERT_EQ(g.size(), 5u);
  std::set<std::string> stems;
  for (const auto& combo : g) stems.insert(combo.stem());
  EXPECT_EQ(stems.size(), 5u);
  EXPECT_EQ(g.front().stem(), "random_p0.2_s1");
}

TEST(Grid, SummaryOrder) {
  ExperimentConfig c;
  c.strategies = {Strategy::random, Strategy::frame_diff, Strategy::uniform};
  c.fractions = {0.5, 0.1};
  c.runs = 1;
  std::vector<std::string> stems;
  for (const auto& combo : expand_grid(c)) stems.push_back(combo.stem());
  EXPECT_EQ(stems, (std::vector<std::string>{"uniform_p0.1_s-", "uniform_p0.5_s-",
                                             "frame_diff_p0.1_s-", "frame_diff_p0.5_s-",
                                             "random_p0.1_s1", "random_p0.5_s1"}));
}

TEST(Grid, DiffPlanSizeAtFivePercent) {
  DiffSeries d;
  d.total_frames = 140;
  d.values.assign(140, 0);
  for (std::size_t t = 1; t < 140; ++t) d.values[t] = (t * 7919) % 1000;
  const auto plan = make_plan({Strategy::frame_diff, 0.05, std::nullopt}, 140, &d);
  EXPECT_EQ(plan.selected.size(), 7u);
}

TEST(Commands, SampleWritesOnePlanPerCombination) {
  MiniDataset ds;
  TempDir out;
  auto c = ds.config(out.path());
  c.strategies = {Strategy::uniform, Strategy::frame_diff, Strategy::random};
  c.fractions = {0.5, 0.2};
  c.runs = 2;
  c.emit_list = true;
  const auto r = cmd_sample(c);
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(files_in(out.path(), ".plan").size(), 8u);
  EXPECT_EQ(files_in(out.path(), ".list").size(), 8u);
  const auto plan = import_plan(out.path() / "uniform_p0.5_s-.plan");
  EXPECT_EQ(plan.selected, (std::vector<FrameIndex>{0, 2, 4, 6, 8}));
  const std::string list = read_text(out.path() / "uniform_p0.5_s-.list");
  EXPECT_NE(list.find("f100.bmp"), std::string::npos);
}

TEST(Commands, EvalAveragesRandomRuns) {
  MiniDataset ds;
  TempDir out;
  auto c = ds.config(out.path());
  c.strategies = {Strategy::random};
  c.fractions = {0.2};
  const int hits[] = {2, 2, 2, 3, 3};
  for (int s = 1; s <= 5; ++s) {
    ds.write_preds(Combination{Strategy::random, 0.2, static_cast<std::uint64_t>(s)}.stem(),
                   hits[s - 1]);
  }
  const auto r = cmd_eval(c);
  ASSERT_EQ(r.exit_code(), 0) << (r.failures.empty() ? "" : r.failures[0]);
  const std::string kv = read_text(out.path() / "eval_summary.kv");
  EXPECT_NE(kv.find("random.p0.2.map50=0.240000\n"), std::string::npos) << kv;
  EXPECT_NE(kv.find("random.p0.2.runs=5\n"), std::string::npos);
  EXPECT_NE(kv.find("random.p0.2.labels=2.0\n"), std::string::npos);
  const std::string table = read_text(out.path() / "eval_summary.txt");
  EXPECT_NE(table.find("Random"), std::string::npos);
  EXPECT_NE(table.find("mAP@0.5"), std::string::npos);
}

TEST(Commands, EvalSingleCombinationAndMissingPredictions) {
  MiniDataset ds;
  TempDir out;
  auto c = ds.config(out.path());
  c.fractions = {0.5, 0.2};
  ds.write_preds("uniform_p0.5_s-", 10);
  ds.write_preds("frame_diff_p0.5_s-", 5);
  ds.write_preds("uniform_p0.2_s-", 1);
  const auto r = cmd_eval(c);
  EXPECT_EQ(r.exit_code(), 2);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_NE(r.failures[0].find("frame_diff_p0.2_s-"), std::string::npos);
  EXPECT_NE(r.failures[0].find("MissingPredictions"), std::string::npos);

  const std::string kv = read_text(out.path() / "eval_summary.kv");
  EXPECT_NE(kv.find("uniform.p0.5.map50=1.000000"), std::string::npos);
  EXPECT_NE(kv.find("frame_diff.p0.5.map50=0.500000"), std::string::npos);
  // Row order: strategy group, then ascending P.
  const auto a = kv.find("uniform.p0.2."), b = kv.find("uniform.p0.5."),
             d = kv.find("frame_diff.p0.5.");
  EXPECT_LT(a, b);
  EXPECT_LT(b, d);
  EXPECT_TRUE(fs::exists(out.path() / "uniform_p0.5_s-.eval.txt"));
}

TEST(Commands, LipschitzDeterministic) {
  MiniDataset ds;
  ds.write_preds("uniform_p0.5_s-", 6);
  ds.write_preds("frame_diff_p0.5_s-", 3);
  TempDir out1, out2;
  for (const TempDir* out : {&out1, &out2}) {
    auto c = ds.config(out->path());
    c.fractions = {0.5};
    c.dump_quotients = true;
    ASSERT_EQ(cmd_lipschitz(c).exit_code(), 0);
  }
  for (const char* name : {"lipschitz_summary.txt", "lipschitz_summary.kv",
                           "uniform_p0.5_s-.quotients.txt", "frame_diff_p0.5_s-.iou.txt"}) {
    EXPECT_EQ(read_text(out1 / name), read_text(out2 / name)) << name;
  }
  // Uniform at 0.5 keeps even frames, so the curve runs over the odd ones.
  const std::string curve = read_text(out1 / "uniform_p0.5_s-.iou.txt");
  EXPECT_EQ(curve.substr(0, 2), "1 ");
  const std::string table = read_text(out1 / "lipschitz_summary.txt");
  EXPECT_NE(table.find("K50"), std::string::npos);
  EXPECT_NE(table.find("K99"), std::string::npos);
}

TEST(Commands, Diffplot) {
  TempDir dir;
  image_io::RgbImage a{2, 2, {}}, b{2, 2, {}};
  const std::uint8_t ga[] = {10, 20, 30, 40}, gb[] = {10, 20, 30, 50};
  for (int p = 0; p < 4; ++p) {
    a.pixels.insert(a.pixels.end(), {ga[p], ga[p], ga[p]});
    b.pixels.insert(b.pixels.end(), {gb[p], gb[p], gb[p]});
  }
  image_io::write_bmp(dir / "a.bmp", a);
  image_io::write_bmp(dir / "b.bmp", b);
  EXPECT_EQ(cmd_diffplot(dir.path()), "1 10\n");

  TempDir single;
  image_io::write_bmp(single / "a.bmp", a);
  try {
    cmd_diffplot(single.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SequenceTooShort);
  }
}

TEST(Report, PercentLabels) {
  EXPECT_EQ(report::percent_label(0.5), "50");
  EXPECT_EQ(report::percent_label(0.333), "33.3");
  EXPECT_EQ(report::percent_label(0.05), "5");
}

}  // namespace
}  // namespace vidcurate
