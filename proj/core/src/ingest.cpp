#include "vidcurate/ingest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "vidcurate/error.hpp"
#include "vidcurate/image_io.hpp"

namespace vidcurate {

namespace fs = std::filesystem;

bool BoundingBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
}

BoundingBox BoundingBox::checked(double x0, double y0, double x1, double y1) {
  BoundingBox b{x0, y0, x1, y1};
  if (!b.valid()) {
    throw Error(Errc::RangeError, fmt::format("invalid box ({}, {}, {}, {})", x0, y0, x1, y1));
  }
  return b;
}

std::string_view to_string(LabelSource s) noexcept {
  return s == LabelSource::human_corrected ? "human_corrected" : "model_accepted";
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

template <class T>
T parse_number(std::string_view tok, const fs::path& file, std::size_t line_no) {
  T value{};
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw Error(Errc::ParseError,
                fmt::format("{}:{}: cannot parse '{}'", file.string(), line_no, tok));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw Error(Errc::ParseError,
                  fmt::format("{}:{}: non-finite value '{}'", file.string(), line_no, tok));
    }
  }
  return value;
}

std::map<ClassId, std::string> read_class_names(const fs::path& dir, bool& declared) {
  std::map<ClassId, std::string> names;
  declared = false;
  const fs::path p = dir / kClassNamesFile;
  std::ifstream in(p);
  if (!in) return names;
  declared = true;
  std::string line;
  ClassId id = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.emplace(id++, line);
  }
  return names;
}

}  // namespace

std::vector<fs::path> list_frame_files(const fs::path& locator) {
  std::vector<fs::path> files;
  fs::path manifest;
  fs::path base;
  if (fs::is_directory(locator)) {
    base = locator;
    if (fs::exists(locator / kFrameManifest)) manifest = locator / kFrameManifest;
  } else if (fs::is_regular_file(locator)) {
    manifest = locator;
    base = locator.parent_path();
  } else {
    throw Error(Errc::IoError, "frame locator not found: " + locator.string());
  }

  if (!manifest.empty()) {
    std::ifstream in(manifest);
    if (!in) throw Error(Errc::IoError, "cannot read manifest: " + manifest.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (is_blank_or_comment(line)) continue;
      files.push_back(base / line);
    }
  } else {
    for (const auto& entry : fs::directory_iterator(locator)) {
      if (entry.is_regular_file() && image_io::is_supported_extension(entry.path())) {
        files.push_back(entry.path());
      }
    }
    // Byte-wise filename order, independent of locale and platform.
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });
  }
  if (files.empty()) throw Error(Errc::EmptySequence, "no frames under " + locator.string());
  return files;
}

FrameSequence load_sequence(const fs::path& locator, double fps) {
  FrameSequence seq;
  seq.fps = fps;
  seq.source_id = locator.string();
  const auto files = list_frame_files(locator);
  seq.frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    image_io::RgbImage img = image_io::decode(files[i]);
    if (!seq.frames.empty() &&
        (img.width != seq.frames.front().width || img.height != seq.frames.front().height)) {
      throw Error(Errc::DimensionMismatch,
                  fmt::format("{} is {}x{}, expected {}x{}", files[i].string(), img.width,
                              img.height, seq.frames.front().width, seq.frames.front().height));
    }
    Frame f;
    f.index = i;
    f.width = img.width;
    f.height = img.height;
    f.pixels = std::move(img.pixels);
    if (fps > 0) f.timestamp = static_cast<double>(i) / fps;
    f.source = files[i];
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  // Exact integer form of round-half-up(0.299 R + 0.587 G + 0.114 B).
  const unsigned sum = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>(std::min(255u, (sum + 500u) / 1000u));
}

GrayFrame to_grayscale(const Frame& frame) {
  GrayFrame g;
  g.index = frame.index;
  g.width = frame.width;
  g.height = frame.height;
  const std::size_t n = static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  g.intensities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.intensities[i] = luma(frame.pixels[3 * i], frame.pixels[3 * i + 1], frame.pixels[3 * i + 2]);
  }
  return g;
}

std::vector<GrayFrame> to_grayscale(const FrameSequence& seq) {
  std::vector<GrayFrame> out;
  out.reserve(seq.size());
  for (const auto& f : seq.frames) out.push_back(to_grayscale(f));
  return out;
}

std::vector<std::string> frame_stems(const FrameSequence& seq) {
  std::vector<std::string> stems;
  stems.reserve(seq.size());
  for (const auto& f : seq.frames) {
    stems.push_back(f.source.empty() ? fmt::format("{:06d}", f.index) : f.source.stem().string());
  }
  return stems;
}

AnnotationSet load_annotations(const fs::path& dir, std::span<const std::string> stems,
                               int image_width, int image_height) {
  if (image_width <= 0 || image_height <= 0) {
    throw Error(Errc::RangeError, "image dimensions must be positive");
  }
  if (!fs::is_directory(dir)) throw Error(Errc::IoError, "label directory not found: " + dir.string());

  AnnotationSet set(stems.size());
  bool declared = false;
  set.class_names = read_class_names(dir, declared);
  const double W = image_width;
  const double H = image_height;

  for (std::size_t i = 0; i < stems.size(); ++i) {
    const fs::path file = dir / (stems[i] + ".txt");
    std::ifstream in(file);
    if (!in) continue;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank_or_comment(line)) continue;
      const auto tok = split_ws(line);
      if (tok.size() != 5) {
        throw Error(Errc::ParseError, fmt::format("{}:{}: expected 5 fields, got {}",
                                                  file.string(), line_no, tok.size()));
      }
      const auto cls = parse_number<ClassId>(tok[0], file, line_no);
      double v[4];
      for (int k = 0; k < 4; ++k) {
        v[k] = parse_number<double>(tok[static_cast<std::size_t>(k) + 1], file, line_no);
        if (v[k] < 0.0 || v[k] > 1.0) {
          throw Error(Errc::RangeError,
                      fmt::format("{}:{}: normalized value {} outside [0,1]", file.string(),
                                  line_no, v[k]));
        }
      }
      if (cls < 0 || (declared && set.class_names.count(cls) == 0)) {
        throw Error(Errc::RangeError,
                    fmt::format("{}:{}: class id {} not declared", file.string(), line_no, cls));
      }
      const double cx = v[0], cy = v[1], w = v[2], h = v[3];
      BoundingBox box{std::clamp((cx - w / 2) * W, 0.0, W), std::clamp((cy - h / 2) * H, 0.0, H),
                      std::clamp((cx + w / 2) * W, 0.0, W), std::clamp((cy + h / 2) * H, 0.0, H)};
      if (!box.valid()) {
        throw Error(Errc::RangeError,
                    fmt::format("{}:{}: degenerate box", file.string(), line_no));
      }
      set.frames[i].push_back(Annotation{i, cls, box, LabelSource::model_accepted});
      if (!declared) set.class_names.emplace(cls, std::to_string(cls));
    }
  }
  return set;
}

AnnotationSet load_annotations(const fs::path& dir, const FrameSequence& seq) {
  const auto stems = frame_stems(seq);
  return load_annotations(dir, stems, seq.width(), seq.height());
}

PredictionSet load_predictions(const fs::path& path, std::size_t frame_count) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read predictions: " + path.string());
  PredictionSet set(frame_count);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 7) {
      throw Error(Errc::ParseError, fmt::format("{}:{}: expected 7 fields, got {}", path.string(),
                                                line_no, tok.size()));
    }
    const auto frame = parse_number<std::size_t>(tok[0], path, line_no);
    const auto cls = parse_number<ClassId>(tok[1], path, line_no);
    const auto conf = parse_number<double>(tok[2], path, line_no);
    double c[4];
    for (int k = 0; k < 4; ++k) {
      c[k] = parse_number<double>(tok[static_cast<std::size_t>(k) + 3], path, line_no);
    }
    if (frame >= frame_count) {
      throw Error(Errc::RangeError, fmt::format("{}:{}: frame {} outside sequence of {}",
                                                path.string(), line_no, frame, frame_count));
    }
    if (conf < 0.0 || conf > 1.0) {
      throw Error(Errc::RangeError,
                  fmt::format("{}:{}: confidence {} outside [0,1]", path.string(), line_no, conf));
    }
    if (cls < 0) {
      throw Error(Errc::RangeError, fmt::format("{}:{}: negative class id", path.string(), line_no));
    }
    BoundingBox box{c[0], c[1], c[2], c[3]};
    if (!box.valid()) {
      throw Error(Errc::RangeError, fmt::format("{}:{}: invalid box", path.string(), line_no));
    }
    set.frames[frame].push_back(Prediction{frame, cls, box, conf});
    set.class_names.emplace(cls, std::to_string(cls));
  }
  return set;
}

std::string format_label_line(ClassId class_id, const BoundingBox& box, int image_width,
                              int image_height) {
  const double W = image_width;
  const double H = image_height;
  return fmt::format("{} {:.6f} {:.6f} {:.6f} {:.6f}", class_id, (box.x_min + box.x_max) / 2 / W,
                     (box.y_min + box.y_max) / 2 / H, box.width() / W, box.height() / H);
}

std::string format_prediction_line(const Prediction& p) {
  return fmt::format("{} {} {} {} {} {} {}", p.frame_index, p.class_id, p.confidence, p.box.x_min,
                     p.box.y_min, p.box.x_max, p.box.y_max);
}

void write_label_file(const fs::path& path, std::span<const Annotation> annotations,
                      int image_width, int image_height) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write label file: " + path.string());
  for (const auto& a : annotations) {
    out << format_label_line(a.class_id, a.box, image_width, image_height) << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

void write_predictions(const fs::path& path, const PredictionSet& preds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write predictions: " + path.string());
  for (const auto& frame : preds.frames) {
    for (const auto& p : frame) out << format_prediction_line(p) << '\n';
  }
  if (!out) throw Error(Errc::IoError, "write failed: " + path.string());
}

}  // namespace vidcurate
