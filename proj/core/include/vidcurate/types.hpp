#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vidcurate {

using FrameIndex = std::size_t;
using ClassId = int;

inline constexpr double kDefaultFps = 30.0;

/// One decoded video frame, RGB8, row-major.
struct Frame {
  FrameIndex index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3
  std::optional<double> timestamp;   // seconds, index / fps
  std::filesystem::path source;      // encoded file this frame was decoded from
};

/// 8-bit luma plane of a Frame.
struct GrayFrame {
  FrameIndex index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> intensities;  // width * height

  [[nodiscard]] std::uint8_t at(int u, int v) const {
    return intensities[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(u)];
  }
};

struct FrameSequence {
  std::vector<Frame> frames;
  double fps = kDefaultFps;
  std::string source_id;

  [[nodiscard]] std::size_t size() const noexcept { return frames.size(); }
  [[nodiscard]] int width() const noexcept { return frames.empty() ? 0 : frames.front().width; }
  [[nodiscard]] int height() const noexcept { return frames.empty() ? 0 : frames.front().height; }
};

/// Axis-aligned pixel-space box. Valid when x_min < x_max, y_min < y_max and
/// all coordinates are finite and non-negative.
struct BoundingBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }
  [[nodiscard]] bool valid() const noexcept;

  /// Throws Errc::RangeError when the box is not valid.
  static BoundingBox checked(double x_min, double y_min, double x_max, double y_max);

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class LabelSource { model_accepted, human_corrected };

struct Annotation {
  FrameIndex frame_index = 0;
  ClassId class_id = 0;
  BoundingBox box;
  LabelSource source = LabelSource::model_accepted;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Prediction {
  FrameIndex frame_index = 0;
  ClassId class_id = 0;
  BoundingBox box;
  double confidence = 0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Per-frame entries keyed by frame index; a frame may hold zero entries.
template <class T>
struct PerFrameSet {
  std::vector<std::vector<T>> frames;
  std::map<ClassId, std::string> class_names;

  PerFrameSet() = default;
  explicit PerFrameSet(std::size_t frame_count) : frames(frame_count) {}

  [[nodiscard]] std::size_t frame_count() const noexcept { return frames.size(); }

  [[nodiscard]] std::size_t total() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.size();
    return n;
  }
};

using AnnotationSet = PerFrameSet<Annotation>;
using PredictionSet = PerFrameSet<Prediction>;

std::string_view to_string(LabelSource s) noexcept;

}  // namespace vidcurate
