#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "oneclick/config.hpp"
#include "oneclick/dataset.hpp"
#include "oneclick/detector.hpp"
#include "oneclick/engine.hpp"

namespace httplib {
class Server;
}

namespace oneclick {

struct ServiceConfig {
  std::filesystem::path dataset;
  NoiseProfile noise;
  EngineConfig engine;
  std::optional<std::filesystem::path> journal;
  std::optional<std::filesystem::path> ui_dir;
};

/// {"dataset", "noise", "engine", "journal", "ui_dir"}; relative paths
/// resolve against `base_dir`.
ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

enum class SessionState { Open, Refined };

struct Session {
  std::string id;
  std::string image_id;
  std::vector<ClickAnnotation> clicks;
  SessionState state = SessionState::Open;
  std::optional<RefinementOutcome> result;
  nlohmann::json result_json;
};

/// Session workflow behind the HTTP routes. Every mutation is appended to the
/// journal (JSON lines) before it is acknowledged; constructing the service
/// over an existing journal replays it. Mutations on one session are
/// serialized; distinct sessions proceed concurrently.
class AnnotationService {
 public:
  AnnotationService(std::vector<GroundTruthImage> images, NoiseProfile noise, EngineConfig engine,
                    std::optional<std::filesystem::path> journal = std::nullopt,
                    std::filesystem::path image_root = {});
  explicit AnnotationService(const ServiceConfig& cfg);

  ApiResponse create_session(const std::string& body);
  ApiResponse get_session(const std::string& session_id) const;
  ApiResponse get_image(const std::string& image_id) const;
  ApiResponse get_image_bytes(const std::string& image_id) const;
  ApiResponse add_click(const std::string& session_id, const std::string& body);
  ApiResponse undo_click(const std::string& session_id);
  ApiResponse refine(const std::string& session_id, const std::string& body);
  ApiResponse get_result(const std::string& session_id) const;
  ApiResponse get_annotations(const std::string& image_id) const;

  std::size_t session_count() const;

 private:
  struct Entry {
    mutable std::mutex mutex;
    Session session;
  };
  struct ImageEntry {
    GroundTruthImage truth;
    SimulatedDetector detector;
  };

  std::shared_ptr<Entry> find_session(const std::string& id) const;
  const ImageEntry* find_image(const std::string& id) const;
  void journal(const nlohmann::json& event);
  void replay(const std::filesystem::path& path);

  // Apply steps shared by live requests and journal replay.
  std::string do_create(const std::string& image_id, std::optional<std::string> id);
  int do_click(Entry& e, double x, double y, ClassId cls);
  void do_undo(Entry& e);
  void do_refine(Entry& e, const EngineConfig& cfg);

  std::map<std::string, ImageEntry> images_;
  std::filesystem::path image_root_;
  EngineConfig engine_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::string> exported_;  // image id -> latest export
  int next_session_ = 1;

  std::mutex journal_mutex_;
  std::optional<std::ofstream> journal_;
  bool replaying_ = false;
};

/// Registers the REST routes (and the UI mount point when configured).
void bind_routes(httplib::Server& server, AnnotationService& service,
                 const std::optional<std::filesystem::path>& ui_dir = std::nullopt);

}  // namespace oneclick
