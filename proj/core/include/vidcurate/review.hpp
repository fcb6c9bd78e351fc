#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidcurate/journal.hpp"
#include "vidcurate/sampling.hpp"
#include "vidcurate/types.hpp"

namespace vidcurate {

enum class ReviewStatus { unreviewed, accepted, corrected };

std::string_view to_string(ReviewStatus s) noexcept;
/// Errc::ValidationError for unknown names.
ReviewStatus parse_review_status(std::string_view name);

struct FrameReview {
  ReviewStatus status = ReviewStatus::unreviewed;
  std::vector<Annotation> boxes;  // label set once reviewed
  std::int64_t timestamp_ms = 0;
  std::uint64_t seq = 0;  // journal sequence number of the last applied mutation
};

struct StatusCounts {
  std::size_t unreviewed = 0;
  std::size_t accepted = 0;
  std::size_t corrected = 0;
};

/// Immutable view of the review state; readers hold it without locking.
struct SessionState {
  std::map<FrameIndex, FrameReview> frames;  // one entry per plan frame
  std::uint64_t last_seq = 0;
  std::int64_t last_timestamp_ms = 0;

  [[nodiscard]] StatusCounts counts() const;
};

/// Box as submitted by an annotator, in source-image pixels.
struct BoxInput {
  ClassId class_id = 0;
  BoundingBox box;
};

struct ExportResult {
  std::filesystem::path directory;
  std::vector<FrameIndex> frames;
  std::size_t label_files = 0;
};

inline constexpr const char* kExportManifest = "manifest.txt";

/// Human-in-the-loop correction state for the frames of one sampling plan.
///
/// Status moves unreviewed -> accepted, unreviewed -> corrected, or
/// corrected -> corrected; anything else is Errc::InvalidTransition. Every
/// mutation is journaled (and synced) before the new state is published, and
/// the constructor replays an existing journal, so a restarted session resumes
/// exactly where it stopped. Mutations carrying a timestamp older than the
/// frame's current one lose (last write wins) with Errc::InvalidTransition.
class ReviewSession {
 public:
  struct Source {
    SamplingPlan plan;
    std::vector<std::filesystem::path> frame_files;  // one per sequence frame
    int width = 0;
    int height = 0;
    PredictionSet predictions;  // may be empty (frames start unannotated)
    std::map<ClassId, std::string> class_names;  // empty: any class id >= 0
  };

  ReviewSession(Source source, const std::filesystem::path& journal_path);

  [[nodiscard]] const SamplingPlan& plan() const noexcept { return src_.plan; }
  [[nodiscard]] int width() const noexcept { return src_.width; }
  [[nodiscard]] int height() const noexcept { return src_.height; }
  [[nodiscard]] const std::map<ClassId, std::string>& class_names() const noexcept {
    return src_.class_names;
  }
  [[nodiscard]] bool in_plan(FrameIndex f) const;
  [[nodiscard]] const std::filesystem::path& frame_file(FrameIndex f) const;
  [[nodiscard]] std::span<const Prediction> predictions(FrameIndex f) const;

  [[nodiscard]] std::shared_ptr<const SessionState> snapshot() const;

  /// Errc::RangeError (not a plan frame), InvalidTransition, IoError (journal).
  FrameReview accept(FrameIndex f, std::optional<std::int64_t> timestamp_ms = std::nullopt);
  /// Full replacement of the frame's boxes. Adds Errc::ValidationError for
  /// boxes that are inverted, outside the image, or of an undeclared class.
  FrameReview correct(FrameIndex f, std::span<const BoxInput> boxes,
                      std::optional<std::int64_t> timestamp_ms = std::nullopt);

  /// First plan frame after `after` (or from the start) with `status`.
  [[nodiscard]] std::optional<FrameIndex> next(std::optional<FrameIndex> after,
                                               ReviewStatus status) const;

  /// Writes `<stem>.txt` per reviewed frame plus manifest.txt (and classes.txt
  /// when names are known), then compacts the journal.
  /// Errc::NothingToExport when no frame is reviewed.
  ExportResult export_labels(const std::filesystem::path& out_dir);

  [[nodiscard]] const std::filesystem::path& journal_path() const noexcept {
    return journal_.path();
  }

 private:
  struct Mutation {
    std::uint64_t seq = 0;
    std::int64_t timestamp_ms = 0;
    FrameIndex frame = 0;
    ReviewStatus status = ReviewStatus::unreviewed;
    std::vector<Annotation> boxes;
  };

  void check_plan_frame(FrameIndex f) const;
  void validate_boxes(std::span<const BoxInput> boxes) const;
  /// Returns the new frame state or throws; does not touch journal or state_.
  static FrameReview apply(const SessionState& state, const Mutation& m);
  FrameReview commit(Mutation m, std::optional<std::int64_t> timestamp_ms);
  static std::string encode(const Mutation& m);
  static Mutation decode(std::string_view payload);

  Source src_;
  std::vector<std::string> stems_;
  Journal journal_;
  std::mutex writer_;
  std::shared_ptr<const SessionState> state_;
};

}  // namespace vidcurate
