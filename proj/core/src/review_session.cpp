#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>

#include "vidcurate/error.hpp"
#include "vidcurate/ingest.hpp"
#include "vidcurate/review.hpp"

namespace vidcurate {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ReviewStatus s) noexcept {
  switch (s) {
    case ReviewStatus::unreviewed: return "unreviewed";
    case ReviewStatus::accepted: return "accepted";
    case ReviewStatus::corrected: return "corrected";
  }
  return "unknown";
}

ReviewStatus parse_review_status(std::string_view name) {
  if (name == "unreviewed") return ReviewStatus::unreviewed;
  if (name == "accepted") return ReviewStatus::accepted;
  if (name == "corrected") return ReviewStatus::corrected;
  throw Error(Errc::ValidationError, fmt::format("unknown status '{}'", name));
}

StatusCounts SessionState::counts() const {
  StatusCounts c;
  for (const auto& [f, r] : frames) {
    switch (r.status) {
      case ReviewStatus::unreviewed: ++c.unreviewed; break;
      case ReviewStatus::accepted: ++c.accepted; break;
      case ReviewStatus::corrected: ++c.corrected; break;
    }
  }
  return c;
}

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ReviewSession::ReviewSession(Source source, const fs::path& journal_path)
    : src_(std::move(source)), journal_(journal_path) {
  if (src_.frame_files.size() != src_.plan.total_frames) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("plan covers {} frames but {} frame files given",
                            src_.plan.total_frames, src_.frame_files.size()));
  }
  if (src_.width <= 0 || src_.height <= 0) {
    throw Error(Errc::RangeError, "review session needs positive image dimensions");
  }
  if (src_.predictions.frame_count() == 0) {
    src_.predictions = PredictionSet(src_.plan.total_frames);
  } else if (src_.predictions.frame_count() != src_.plan.total_frames) {
    throw Error(Errc::DimensionMismatch, "prediction set does not match plan frame count");
  }
  stems_.reserve(src_.frame_files.size());
  for (const auto& p : src_.frame_files) stems_.push_back(p.stem().string());

  auto state = std::make_shared<SessionState>();
  for (FrameIndex f : src_.plan.selected) state->frames.emplace(f, FrameReview{});
  for (const auto& payload : journal_.records()) {
    Mutation m;
    FrameReview next;
    try {
      m = decode(payload);
      check_plan_frame(m.frame);
      next = apply(*state, m);
    } catch (const Error& e) {
      throw Error(Errc::IoError,
                  fmt::format("{}: cannot replay record: {}", journal_path.string(), e.what()));
    }
    state->frames[m.frame] = std::move(next);
    state->last_seq = std::max(state->last_seq, m.seq);
    state->last_timestamp_ms = std::max(state->last_timestamp_ms, m.timestamp_ms);
  }
  state_ = std::move(state);
}

bool ReviewSession::in_plan(FrameIndex f) const {
  return std::binary_search(src_.plan.selected.begin(), src_.plan.selected.end(), f);
}

void ReviewSession::check_plan_frame(FrameIndex f) const {
  if (!in_plan(f)) throw Error(Errc::RangeError, fmt::format("frame {} is not in the plan", f));
}

const fs::path& ReviewSession::frame_file(FrameIndex f) const {
  check_plan_frame(f);
  return src_.frame_files[f];
}

std::span<const Prediction> ReviewSession::predictions(FrameIndex f) const {
  check_plan_frame(f);
  return src_.predictions.frames[f];
}

std::shared_ptr<const SessionState> ReviewSession::snapshot() const { return std::atomic_load(&state_); }

void ReviewSession::validate_boxes(std::span<const BoxInput> boxes) const {
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i].box;
    if (!b.valid()) {
      throw Error(Errc::ValidationError,
                  fmt::format("box {}: need 0 <= x_min < x_max and 0 <= y_min < y_max", i));
    }
    if (b.x_max > src_.width || b.y_max > src_.height) {
      throw Error(Errc::ValidationError,
                  fmt::format("box {}: extends past the {}x{} image", i, src_.width, src_.height));
    }
    const ClassId c = boxes[i].class_id;
    if (c < 0 || (!src_.class_names.empty() && src_.class_names.count(c) == 0)) {
      throw Error(Errc::ValidationError, fmt::format("box {}: unknown class {}", i, c));
    }
  }
}

FrameReview ReviewSession::apply(const SessionState& state, const Mutation& m) {
  const auto it = state.frames.find(m.frame);
  if (it == state.frames.end()) {
    throw Error(Errc::RangeError, fmt::format("frame {} is not in the plan", m.frame));
  }
  const FrameReview& cur = it->second;
  const bool allowed =
      (cur.status == ReviewStatus::unreviewed && m.status != ReviewStatus::unreviewed) ||
      (cur.status == ReviewStatus::corrected && m.status == ReviewStatus::corrected);
  if (!allowed) {
    throw Error(Errc::InvalidTransition, fmt::format("frame {}: {} -> {} not allowed", m.frame,
                                                     to_string(cur.status), to_string(m.status)));
  }
  if (cur.status != ReviewStatus::unreviewed && m.timestamp_ms < cur.timestamp_ms) {
    throw Error(Errc::InvalidTransition,
                fmt::format("frame {}: stale write (ts {} < {})", m.frame, m.timestamp_ms,
                            cur.timestamp_ms));
  }
  return FrameReview{m.status, m.boxes, m.timestamp_ms, m.seq};
}

FrameReview ReviewSession::commit(Mutation m, std::optional<std::int64_t> timestamp_ms) {
  std::lock_guard lock(writer_);
  const auto cur = std::atomic_load(&state_);
  m.seq = cur->last_seq + 1;
  m.timestamp_ms = timestamp_ms ? *timestamp_ms : std::max(now_ms(), cur->last_timestamp_ms);
  FrameReview next = apply(*cur, m);

  journal_.append(encode(m));

  auto updated = std::make_shared<SessionState>(*cur);
  updated->frames[m.frame] = next;
  updated->last_seq = m.seq;
  updated->last_timestamp_ms = std::max(cur->last_timestamp_ms, m.timestamp_ms);
  std::atomic_store(&state_, std::shared_ptr<const SessionState>(std::move(updated)));
  return next;
}

FrameReview ReviewSession::accept(FrameIndex f, std::optional<std::int64_t> timestamp_ms) {
  check_plan_frame(f);
  Mutation m;
  m.frame = f;
  m.status = ReviewStatus::accepted;
  for (const auto& p : src_.predictions.frames[f]) {
    m.boxes.push_back(Annotation{f, p.class_id, p.box, LabelSource::model_accepted});
  }
  return commit(std::move(m), timestamp_ms);
}

FrameReview ReviewSession::correct(FrameIndex f, std::span<const BoxInput> boxes,
                                   std::optional<std::int64_t> timestamp_ms) {
  check_plan_frame(f);
  validate_boxes(boxes);
  Mutation m;
  m.frame = f;
  m.status = ReviewStatus::corrected;
  for (const auto& b : boxes) {
    m.boxes.push_back(Annotation{f, b.class_id, b.box, LabelSource::human_corrected});
  }
  return commit(std::move(m), timestamp_ms);
}

std::optional<FrameIndex> ReviewSession::next(std::optional<FrameIndex> after,
                                              ReviewStatus status) const {
  const auto snap = snapshot();
  auto it = after ? snap->frames.upper_bound(*after) : snap->frames.begin();
  for (; it != snap->frames.end(); ++it) {
    if (it->second.status == status) return it->first;
  }
  return std::nullopt;
}

ExportResult ReviewSession::export_labels(const fs::path& out_dir) {
  std::lock_guard lock(writer_);
  const auto snap = std::atomic_load(&state_);
  std::vector<std::string> compacted;
  ExportResult result;
  result.directory = out_dir;
  for (const auto& [f, r] : snap->frames) {
    if (r.status == ReviewStatus::unreviewed) continue;
    result.frames.push_back(f);
    compacted.push_back(encode(Mutation{r.seq, r.timestamp_ms, f, r.status, r.boxes}));
  }
  if (result.frames.empty()) throw Error(Errc::NothingToExport, "no frame has been reviewed");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::IoError, fmt::format("{}: {}", out_dir.string(), ec.message()));

  std::string manifest = "# frame_index stem status provenance boxes\n";
  for (FrameIndex f : result.frames) {
    const FrameReview& r = snap->frames.at(f);
    write_label_file(out_dir / (stems_[f] + ".txt"), r.boxes, src_.width, src_.height);
    ++result.label_files;
    const LabelSource prov = r.status == ReviewStatus::corrected ? LabelSource::human_corrected
                                                                 : LabelSource::model_accepted;
    manifest += fmt::format("{} {} {} {} {}\n", f, stems_[f], to_string(r.status), to_string(prov),
                            r.boxes.size());
  }
  {
    std::ofstream out(out_dir / kExportManifest, std::ios::binary | std::ios::trunc);
    out << manifest;
    if (!out) throw Error(Errc::IoError, "cannot write export manifest");
  }
  if (!src_.class_names.empty()) {
    std::ofstream out(out_dir / kClassNamesFile, std::ios::binary | std::ios::trunc);
    ClassId expect = 0;
    for (const auto& [id, name] : src_.class_names) {
      for (; expect < id; ++expect) out << expect << '\n';
      out << name << '\n';
      ++expect;
    }
    if (!out) throw Error(Errc::IoError, "cannot write class names");
  }
  journal_.compact(compacted);
  return result;
}

std::string ReviewSession::encode(const Mutation& m) {
  json boxes = json::array();
  for (const auto& a : m.boxes) {
    boxes.push_back({a.class_id, a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max});
  }
  json j{{"seq", m.seq},
         {"ts", m.timestamp_ms},
         {"frame", m.frame},
         {"status", std::string(to_string(m.status))},
         {"boxes", std::move(boxes)}};
  return j.dump();
}

ReviewSession::Mutation ReviewSession::decode(std::string_view payload) {
  Mutation m;
  try {
    const json j = json::parse(payload);
    m.seq = j.at("seq").get<std::uint64_t>();
    m.timestamp_ms = j.at("ts").get<std::int64_t>();
    m.frame = j.at("frame").get<FrameIndex>();
    m.status = parse_review_status(j.at("status").get<std::string>());
    const LabelSource src = m.status == ReviewStatus::corrected ? LabelSource::human_corrected
                                                                : LabelSource::model_accepted;
    for (const auto& b : j.at("boxes")) {
      m.boxes.push_back(Annotation{m.frame, b.at(0).get<ClassId>(),
                                   BoundingBox{b.at(1).get<double>(), b.at(2).get<double>(),
                                               b.at(3).get<double>(), b.at(4).get<double>()},
                                   src});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  return m;
}

}  // namespace vidcurate
