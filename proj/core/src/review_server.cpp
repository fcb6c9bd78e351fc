#include "vidcurate/review_server.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "vidcurate/error.hpp"
#include "vidcurate/image_io.hpp"

namespace vidcurate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json box_json(ClassId c, const BoundingBox& b) {
  return {{"class_id", c}, {"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

json counts_json(const StatusCounts& c) {
  return {{"unreviewed", c.unreviewed}, {"accepted", c.accepted}, {"corrected", c.corrected}};
}

int status_for(Errc code) {
  switch (code) {
    case Errc::ValidationError:
    case Errc::ParseError:
      return 400;
    case Errc::RangeError:
      return 404;
    case Errc::InvalidTransition:
    case Errc::NothingToExport:
      return 409;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message) {
  send_json(res, {{"error", std::string(to_string(code))}, {"message", message}}, status_for(code));
}

std::string content_type_for(const fs::path& p) {
  std::string ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (ext == ".png") return "image/png";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

FrameIndex parse_index(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<FrameIndex>(v);
  } catch (const std::exception&) {
    throw Error(Errc::ValidationError, "bad frame index '" + s + "'");
  }
}

std::optional<std::int64_t> optional_ts(const json& body) {
  if (body.is_object() && body.contains("ts") && !body["ts"].is_null()) {
    return body["ts"].get<std::int64_t>();
  }
  return std::nullopt;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::ValidationError, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

struct ReviewServer::Impl {
  ReviewSession& session;
  ReviewServerOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = -1;

  Impl(ReviewSession& s, ReviewServerOptions o) : session(s), options(std::move(o)) { routes(); }

  json frame_json(FrameIndex f) const {
    const auto snap = session.snapshot();
    const FrameReview& r = snap->frames.at(f);
    json preds = json::array();
    for (const auto& p : session.predictions(f)) {
      json j = box_json(p.class_id, p.box);
      j["confidence"] = p.confidence;
      preds.push_back(std::move(j));
    }
    json boxes = json::array();
    for (const auto& a : r.boxes) {
      json j = box_json(a.class_id, a.box);
      j["source"] = std::string(to_string(a.source));
      boxes.push_back(std::move(j));
    }
    return {{"frame", f},
            {"status", std::string(to_string(r.status))},
            {"timestamp", r.timestamp_ms},
            {"predictions", std::move(preds)},
            {"boxes", std::move(boxes)}};
  }

  template <class F>
  httplib::Server::Handler guarded(F fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, Errc::ValidationError, e.what());
      } catch (const std::exception& e) {
        send_error(res, Errc::IoError, e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/plan", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto& plan = session.plan();
      json classes = json::object();
      for (const auto& [id, name] : session.class_names()) classes[std::to_string(id)] = name;
      send_json(res, {{"strategy", std::string(to_string(plan.strategy))},
                      {"fraction", plan.fraction},
                      {"seed", plan.seed ? json(*plan.seed) : json(nullptr)},
                      {"total_frames", plan.total_frames},
                      {"selected", plan.selected},
                      {"width", session.width()},
                      {"height", session.height()},
                      {"classes", std::move(classes)},
                      {"counts", counts_json(session.snapshot()->counts())}});
    }));

    server.Get(R"(/api/frames/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const FrameIndex f = parse_index(req.matches[1]);
      const fs::path& file = session.frame_file(f);
      const auto bytes = image_io::read_file(file);
      res.set_content(std::string(bytes.begin(), bytes.end()), content_type_for(file));
    }));

    server.Get(R"(/api/frames/(\d+)/boxes)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const FrameIndex f = parse_index(req.matches[1]);
                 if (!session.in_plan(f)) throw Error(Errc::RangeError, "frame not in plan");
                 send_json(res, frame_json(f));
               }));

    server.Post(R"(/api/frames/(\d+)/accept)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const FrameIndex f = parse_index(req.matches[1]);
                  session.accept(f, optional_ts(parse_body(req)));
                  send_json(res, frame_json(f));
                }));

    server.Post(R"(/api/frames/(\d+)/boxes)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const FrameIndex f = parse_index(req.matches[1]);
                  const json body = parse_body(req);
                  if (!body.is_object() || !body.contains("boxes") || !body["boxes"].is_array()) {
                    throw Error(Errc::ValidationError, "body must be {\"boxes\": [...]}");
                  }
                  std::vector<BoxInput> boxes;
                  for (const auto& b : body["boxes"]) {
                    boxes.push_back(BoxInput{b.at("class_id").get<ClassId>(),
                                             BoundingBox{b.at("x_min").get<double>(),
                                                         b.at("y_min").get<double>(),
                                                         b.at("x_max").get<double>(),
                                                         b.at("y_max").get<double>()}});
                  }
                  session.correct(f, boxes, optional_ts(body));
                  send_json(res, frame_json(f));
                }));

    server.Get("/api/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<FrameIndex> after;
      if (req.has_param("after") && !req.get_param_value("after").empty()) {
        const std::string a = req.get_param_value("after");
        if (a != "-1") after = parse_index(a);
      }
      const ReviewStatus status = req.has_param("status")
                                      ? parse_review_status(req.get_param_value("status"))
                                      : ReviewStatus::unreviewed;
      const auto next = session.next(after, status);
      send_json(res, {{"frame", next ? json(*next) : json(nullptr)},
                      {"status", std::string(to_string(status))}});
    }));

    server.Post("/api/export", guarded([this](const httplib::Request&, httplib::Response& res) {
      const ExportResult r = session.export_labels(options.export_dir);
      send_json(res, {{"directory", r.directory.string()},
                      {"label_files", r.label_files},
                      {"frames", r.frames},
                      {"counts", counts_json(session.snapshot()->counts())}});
    }));

    if (!options.ui_dir.empty()) {
      if (!server.set_mount_point("/", options.ui_dir.string())) {
        throw Error(Errc::IoError, "UI directory not found: " + options.ui_dir.string());
      }
    }
  }
};

ReviewServer::ReviewServer(ReviewSession& session, ReviewServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {
  if (impl_->options.export_dir.empty()) {
    impl_->options.export_dir = session.journal_path().parent_path() / "labels_export";
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
  if (impl_->bound_port >= 0) return impl_->bound_port;
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    impl_->bound_port = o.port;
  }
  if (impl_->bound_port <= 0) {
    impl_->bound_port = -1;
    throw Error(Errc::IoError, fmt::format("cannot bind {}:{}", o.host, o.port));
  }
  return impl_->bound_port;
}

void ReviewServer::listen() {
  bind();
  impl_->server.listen_after_bind();
}

int ReviewServer::start() {
  const int p = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return p;
}

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ReviewServer::port() const noexcept { return impl_->bound_port; }

}  // namespace vidcurate
