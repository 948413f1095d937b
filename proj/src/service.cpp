#include "oneclick/service.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "oneclick/json_io.hpp"

namespace oneclick {

using nlohmann::json;

namespace {

ApiResponse error(int status, std::string code, std::string message,
                  std::optional<std::string> field = std::nullopt) {
  json body = {{"code", std::move(code)}, {"message", std::move(message)}};
  if (field) body["field"] = *field;
  return {status, body.dump()};
}

ApiResponse ok(int status, const json& body) { return {status, body.dump()}; }

// Empty bodies read as {}.
std::optional<json> parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) return std::nullopt;
    return j;
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
}

json click_json(const ClickAnnotation& c) {
  return {{"x", c.x}, {"y", c.y}, {"class_id", c.class_id}, {"sequence", c.sequence}};
}

std::string state_name(SessionState s) { return s == SessionState::Open ? "open" : "refined"; }

std::string guess_content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  return "application/octet-stream";
}

}  // namespace

ServiceConfig service_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("dataset")) {
    throw std::invalid_argument("service config: 'dataset' is required");
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  ServiceConfig cfg;
  cfg.dataset = resolve(j.at("dataset").get<std::string>());
  if (j.contains("noise")) cfg.noise = noise_profile_from_json(j.at("noise"));
  if (j.contains("engine")) cfg.engine = engine_config_from_json(j.at("engine"));
  if (j.contains("journal")) cfg.journal = resolve(j.at("journal").get<std::string>());
  if (j.contains("ui_dir")) cfg.ui_dir = resolve(j.at("ui_dir").get<std::string>());
  return cfg;
}

AnnotationService::AnnotationService(std::vector<GroundTruthImage> images, NoiseProfile noise,
                                     EngineConfig engine, std::optional<std::filesystem::path> journal,
                                     std::filesystem::path image_root)
    : image_root_(std::move(image_root)), engine_(std::move(engine)) {
  engine_.validate();
  for (GroundTruthImage& gt : images) {
    const std::string id = gt.image.id;
    SimulatedDetector detector(gt, noise);
    if (!images_.try_emplace(id, ImageEntry{std::move(gt), std::move(detector)}).second) {
      throw std::invalid_argument("duplicate image id '" + id + "'");
    }
  }
  if (journal) {
    if (std::filesystem::exists(*journal)) replay(*journal);
    journal_.emplace(*journal, std::ios::app);
    if (!*journal_) throw std::runtime_error("cannot open journal " + journal->string());
  }
}

AnnotationService::AnnotationService(const ServiceConfig& cfg)
    : AnnotationService(load_dataset(cfg.dataset), cfg.noise, cfg.engine, cfg.journal, cfg.dataset) {}

std::size_t AnnotationService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<AnnotationService::Entry> AnnotationService::find_session(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

const AnnotationService::ImageEntry* AnnotationService::find_image(const std::string& id) const {
  auto it = images_.find(id);
  return it == images_.end() ? nullptr : &it->second;
}

void AnnotationService::journal(const json& event) {
  if (replaying_ || !journal_) return;
  std::lock_guard lock(journal_mutex_);
  *journal_ << event.dump() << '\n';
  journal_->flush();
}

std::string AnnotationService::do_create(const std::string& image_id, std::optional<std::string> id) {
  std::unique_lock lock(sessions_mutex_);
  if (!id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06d", next_session_);
    id = buf;
  }
  ++next_session_;
  auto entry = std::make_shared<Entry>();
  entry->session.id = *id;
  entry->session.image_id = image_id;
  sessions_[*id] = entry;
  return *id;
}

int AnnotationService::do_click(Entry& e, double x, double y, ClassId cls) {
  const int sequence = static_cast<int>(e.session.clicks.size());
  e.session.clicks.push_back({x, y, cls, sequence});
  e.session.state = SessionState::Open;
  e.session.result.reset();
  e.session.result_json = nullptr;
  return sequence;
}

void AnnotationService::do_undo(Entry& e) {
  e.session.clicks.pop_back();
  e.session.state = SessionState::Open;
  e.session.result.reset();
  e.session.result_json = nullptr;
}

void AnnotationService::do_refine(Entry& e, const EngineConfig& cfg) {
  const ImageEntry* img = find_image(e.session.image_id);
  RefinementOutcome outcome = refine_image(img->truth.image, e.session.clicks, img->detector, cfg);
  json body = to_json(outcome);
  body["session_id"] = e.session.id;
  body["image_id"] = e.session.image_id;
  std::string exported = export_annotations(outcome.annotations, img->truth.image);
  e.session.result_json = std::move(body);
  e.session.result = std::move(outcome);
  e.session.state = SessionState::Refined;
  std::unique_lock lock(sessions_mutex_);
  exported_[e.session.image_id] = std::move(exported);
}

void AnnotationService::replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  replaying_ = true;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json ev = json::parse(line);
      const std::string type = ev.at("event").get<std::string>();
      const std::string sid = ev.at("session").get<std::string>();
      if (type == "create") {
        do_create(ev.at("image").get<std::string>(), sid);
        continue;
      }
      auto entry = find_session(sid);
      if (!entry) throw std::runtime_error("unknown session " + sid);
      if (type == "click") {
        do_click(*entry, ev.at("x").get<double>(), ev.at("y").get<double>(), ev.at("class_id").get<int>());
      } else if (type == "undo") {
        do_undo(*entry);
      } else if (type == "refine") {
        do_refine(*entry, engine_config_from_json(ev.at("overrides"), engine_));
      } else {
        throw std::runtime_error("unknown event '" + type + "'");
      }
    } catch (const std::exception& ex) {
      replaying_ = false;
      throw std::runtime_error("journal " + path.string() + " line " + std::to_string(line_no) + ": " +
                               ex.what());
    }
  }
  replaying_ = false;
}

ApiResponse AnnotationService::create_session(const std::string& body) {
  auto j = parse_body(body);
  if (!j) return error(400, "bad_request", "body must be a JSON object");
  if (!j->contains("image_id") || !(*j)["image_id"].is_string()) {
    return error(422, "invalid", "image_id is required", "image_id");
  }
  const std::string image_id = (*j)["image_id"].get<std::string>();
  if (!find_image(image_id)) return error(404, "not_found", "no image '" + image_id + "'", "image_id");
  const std::string id = do_create(image_id, std::nullopt);
  journal({{"event", "create"}, {"session", id}, {"image", image_id}});
  return ok(201, {{"session_id", id}});
}

ApiResponse AnnotationService::get_session(const std::string& session_id) const {
  auto entry = find_session(session_id);
  if (!entry) return error(404, "not_found", "no session '" + session_id + "'");
  std::lock_guard lock(entry->mutex);
  const Session& s = entry->session;
  json clicks = json::array();
  for (const ClickAnnotation& c : s.clicks) clicks.push_back(click_json(c));
  json body = {{"session_id", s.id}, {"image_id", s.image_id}, {"state", state_name(s.state)},
               {"clicks", std::move(clicks)}};
  body["result"] = s.result ? s.result_json : json(nullptr);
  return ok(200, body);
}

ApiResponse AnnotationService::get_image(const std::string& image_id) const {
  const ImageEntry* img = find_image(image_id);
  if (!img) return error(404, "not_found", "no image '" + image_id + "'");
  const ImageRef& ref = img->truth.image;
  return ok(200, {{"image", {{"id", ref.id}, {"width", ref.width}, {"height", ref.height}, {"uri", ref.uri}}},
                  {"labels", img->truth.labels.names()}});
}

ApiResponse AnnotationService::get_image_bytes(const std::string& image_id) const {
  const ImageEntry* img = find_image(image_id);
  if (!img) return error(404, "not_found", "no image '" + image_id + "'");
  const std::filesystem::path file = image_root_ / img->truth.image.uri;
  std::ifstream in(file, std::ios::binary);
  if (img->truth.image.uri.empty() || !in) {
    return error(404, "not_found", "image file for '" + image_id + "' is not available");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return {200, ss.str(), guess_content_type(file)};
}

ApiResponse AnnotationService::add_click(const std::string& session_id, const std::string& body) {
  auto entry = find_session(session_id);
  if (!entry) return error(404, "not_found", "no session '" + session_id + "'");
  auto j = parse_body(body);
  if (!j) return error(400, "bad_request", "body must be a JSON object");
  for (const char* key : {"x", "y"}) {
    if (!j->contains(key) || !(*j)[key].is_number()) return error(422, "invalid", std::string(key) + " must be a number", key);
  }
  if (!j->contains("class_id") || !(*j)["class_id"].is_number_integer()) {
    return error(422, "invalid", "class_id must be an integer", "class_id");
  }
  const double x = (*j)["x"].get<double>();
  const double y = (*j)["y"].get<double>();
  const int cls = (*j)["class_id"].get<int>();

  std::lock_guard lock(entry->mutex);
  const ImageEntry* img = find_image(entry->session.image_id);
  const ImageRef& ref = img->truth.image;
  if (!std::isfinite(x) || x < 0.0 || x > ref.width) {
    return error(422, "out_of_bounds", "x must lie in [0, " + std::to_string(ref.width) + "]", "x");
  }
  if (!std::isfinite(y) || y < 0.0 || y > ref.height) {
    return error(422, "out_of_bounds", "y must lie in [0, " + std::to_string(ref.height) + "]", "y");
  }
  if (!img->truth.labels.contains(cls)) return error(422, "invalid", "unknown class id", "class_id");

  journal({{"event", "click"}, {"session", session_id}, {"x", x}, {"y", y}, {"class_id", cls}});
  const int sequence = do_click(*entry, x, y, cls);
  return ok(200, {{"sequence", sequence}, {"x", x}, {"y", y}, {"class_id", cls}});
}

ApiResponse AnnotationService::undo_click(const std::string& session_id) {
  auto entry = find_session(session_id);
  if (!entry) return error(404, "not_found", "no session '" + session_id + "'");
  std::lock_guard lock(entry->mutex);
  if (entry->session.clicks.empty()) return error(409, "conflict", "session has no clicks to undo");
  const ClickAnnotation removed = entry->session.clicks.back();
  journal({{"event", "undo"}, {"session", session_id}});
  do_undo(*entry);
  return ok(200, {{"removed", click_json(removed)}, {"clicks", entry->session.clicks.size()}});
}

ApiResponse AnnotationService::refine(const std::string& session_id, const std::string& body) {
  auto entry = find_session(session_id);
  if (!entry) return error(404, "not_found", "no session '" + session_id + "'");
  auto j = parse_body(body);
  if (!j) return error(400, "bad_request", "body must be a JSON object");
  json overrides = j->contains("config") ? (*j)["config"] : *j;
  EngineConfig cfg;
  try {
    cfg = engine_config_from_json(overrides, engine_);
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    return error(422, "invalid", msg, msg.substr(0, msg.find(':')));
  }

  std::lock_guard lock(entry->mutex);
  journal({{"event", "refine"}, {"session", session_id}, {"overrides", overrides}});
  do_refine(*entry, cfg);
  return ok(200, entry->session.result_json);
}

ApiResponse AnnotationService::get_result(const std::string& session_id) const {
  auto entry = find_session(session_id);
  if (!entry) return error(404, "not_found", "no session '" + session_id + "'");
  std::lock_guard lock(entry->mutex);
  if (entry->session.state != SessionState::Refined) {
    return error(409, "conflict", "session has not been refined");
  }
  return ok(200, entry->session.result_json);
}

ApiResponse AnnotationService::get_annotations(const std::string& image_id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = exported_.find(image_id);
  if (it == exported_.end()) return error(404, "not_found", "no refined annotations for '" + image_id + "'");
  return {200, it->second};
}

void bind_routes(httplib::Server& server, AnnotationService& service,
                 const std::optional<std::filesystem::path>& ui_dir) {
  auto send = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Post("/sessions", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.create_session(req.body));
  });
  server.Get(R"(/sessions/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_session(req.matches[1]));
  });
  server.Get(R"(/images/([^/]+)/raw)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_image_bytes(req.matches[1]));
  });
  server.Get(R"(/images/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_image(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/clicks)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.add_click(req.matches[1], req.body));
  });
  server.Delete(R"(/sessions/([^/]+)/clicks/last)",
                [&service, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.undo_click(req.matches[1]));
                });
  server.Post(R"(/sessions/([^/]+)/refine)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.refine(req.matches[1], req.body));
  });
  server.Get(R"(/sessions/([^/]+)/result)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_result(req.matches[1]));
  });
  server.Get(R"(/annotations/([^/]+))", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_annotations(req.matches[1]));
  });
  if (ui_dir) server.set_mount_point("/", ui_dir->string());
}

}  // namespace oneclick
