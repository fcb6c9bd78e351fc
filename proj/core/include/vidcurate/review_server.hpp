#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "vidcurate/review.hpp"

namespace vidcurate {

struct ReviewServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path ui_dir;      // static mount at "/" when non-empty
  std::filesystem::path export_dir;  // target of POST /api/export
};

/// JSON-over-HTTP front end for a ReviewSession.
///
///   GET  /api/plan                      plan metadata and status tallies
///   GET  /api/frames/{i}                original encoded image bytes
///   GET  /api/frames/{i}/boxes          predictions, current boxes, status
///   POST /api/frames/{i}/accept         accept the predictions as labels
///   POST /api/frames/{i}/boxes          {"boxes": [...]} full replacement
///   GET  /api/next?after={i}&status=s   next plan frame with status s
///   POST /api/export                    write label files + manifest
///
/// Errors come back as {"error": <code>, "message": ...} with 400 (validation),
/// 404 (unknown frame), 409 (transition / nothing to export) or 500 (journal I/O).
class ReviewServer {
 public:
  ReviewServer(ReviewSession& session, ReviewServerOptions options);
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds the listening socket and returns the port. Errc::IoError on failure.
  int bind();
  /// Serves until stop(); binds first if needed.
  void listen();
  /// bind() + listen() on a background thread; returns once accepting.
  int start();
  void stop();

  [[nodiscard]] int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vidcurate
