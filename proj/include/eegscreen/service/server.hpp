#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "eegscreen/classifier.hpp"
#include "eegscreen/error.hpp"
#include "eegscreen/pipeline.hpp"
#include "eegscreen/service/session_store.hpp"

namespace httplib {
class Server;
}

namespace eegscreen::screening {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir;    // empty: sessions live in memory only
  std::filesystem::path static_dir;  // empty: built-in placeholder page at /
  Thresholds thresholds;
};

struct ModelEntry {
  std::shared_ptr<const ResNet> model;
  PipelineConfig pipeline;
};

int http_status(Errc code);
nlohmann::json error_body(Errc code, const std::string& message);

// Full pipeline on one upload. Session-level p_adhd is the mean of the
// per-segment class-1 probabilities.
nlohmann::json infer_eeg(const ModelEntry& m, const Recording& rec);

class ScreeningServer {
 public:
  explicit ScreeningServer(ServerConfig cfg);
  ~ScreeningServer();
  ScreeningServer(const ScreeningServer&) = delete;
  ScreeningServer& operator=(const ScreeningServer&) = delete;

  void add_model(const std::string& model_id, std::shared_ptr<const ResNet> model, PipelineConfig pipeline);
  // Pipeline settings come from the weights metadata ("pipeline") when present.
  void load_model(const std::string& model_id, const std::filesystem::path& weights);

  // Blocking.
  bool listen();
  int bind_to_any_port();
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  SessionStore& store() { return store_; }
  const ServerConfig& config() const { return cfg_; }

 private:
  void routes();
  ModelEntry model_for(const std::string& model_id) const;

  ServerConfig cfg_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> http_;
  mutable std::shared_mutex models_mu_;
  std::map<std::string, ModelEntry> models_;
};

}  // namespace eegscreen::screening
