#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vidcurate/types.hpp"

namespace vidcurate {

/// Name of the optional manifest inside a frame directory. When present, its
/// lines (relative paths) define the frame order; otherwise image files are
/// taken in lexicographic filename order.
inline constexpr const char* kFrameManifest = "frames.txt";

/// Optional class name table inside a label directory, one name per line,
/// line number = class id.
inline constexpr const char* kClassNamesFile = "classes.txt";

/// Loads a directory (or a manifest file) of PNG/BMP frames.
/// Errors: EmptySequence, DimensionMismatch, DecodeError (names the file).
FrameSequence load_sequence(const std::filesystem::path& locator, double fps = kDefaultFps);

/// Lists the image files load_sequence would decode, in frame order, without
/// decoding them.
std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& locator);

/// BT.601 luma, round half up.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
GrayFrame to_grayscale(const Frame& frame);
std::vector<GrayFrame> to_grayscale(const FrameSequence& seq);

/// Label-file stem for each frame (filename without extension).
std::vector<std::string> frame_stems(const FrameSequence& seq);

/// Reads `<stem>.txt` label files (`class_id cx cy w h`, normalized) for each
/// stem; frame i of the result corresponds to stems[i]. Missing files are
/// frames with no objects.
/// Errors: ParseError (file:line), RangeError (value outside [0,1] or class
/// outside classes.txt).
AnnotationSet load_annotations(const std::filesystem::path& dir, std::span<const std::string> stems,
                               int image_width, int image_height);
AnnotationSet load_annotations(const std::filesystem::path& dir, const FrameSequence& seq);

/// Reads `frame_index class_id confidence x_min y_min x_max y_max` records.
/// Errors: ParseError, RangeError (confidence, box, or frame_index >= frame_count).
PredictionSet load_predictions(const std::filesystem::path& path, std::size_t frame_count);

/// Formats one normalized label line for `box` on a width x height image.
std::string format_label_line(ClassId class_id, const BoundingBox& box, int image_width,
                              int image_height);
std::string format_prediction_line(const Prediction& p);

/// Writes a label file; an empty list produces an empty file.
void write_label_file(const std::filesystem::path& path, std::span<const Annotation> annotations,
                      int image_width, int image_height);
void write_predictions(const std::filesystem::path& path, const PredictionSet& preds);

}  // namespace vidcurate
