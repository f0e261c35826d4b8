#include "eegscreen/service/server.hpp"

#include <httplib.h>

#include "eegscreen/recording.hpp"
#include "eegscreen/weights_io.hpp"

namespace eegscreen::screening {

namespace {

constexpr std::string_view kEegDisclaimer =
    "Research prototype output. Not a diagnosis and not clinically validated.";

constexpr std::string_view kIndexHtml = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>eegscreen</title></head>
<body><h1>eegscreen screening service</h1>
<p>The browser interface is not bundled with this build. The JSON API lives under /api/v1.</p>
</body></html>
)";

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message) {
  send_json(res, http_status(code), error_body(code, message));
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("request body is not JSON: ") + e.what());
  }
}

std::string response_text(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw Error(Errc::OutOfDomainResponse, "response must be a string or integer");
}

double number_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error(Errc::BadFormat, std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

nlohmann::json progress(const ScreeningSession& s) {
  return {{"answered", s.records.size()}, {"total", s.trials.size()}};
}

// Wraps a handler so library errors become {code, message} responses.
template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, Errc::BadFormat, e.what());
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownSession:
    case Errc::UnknownTrial:
      return 404;
    case Errc::DuplicateResponse:
    case Errc::SessionIncomplete:
      return 409;
    case Errc::BadConfig:
    case Errc::BadFormat:
      return 400;
    case Errc::NoModelLoaded:
      return 503;
    default:
      return is_validation_error(code) ? 422 : 500;
  }
}

nlohmann::json error_body(Errc code, const std::string& message) {
  return {{"code", std::string(to_string(code))}, {"message", message}};
}

nlohmann::json infer_eeg(const ModelEntry& m, const Recording& rec) {
  const auto scalograms = scalograms_from_recording(rec, m.pipeline);
  const auto probs = predict_proba(*m.model, scalograms);
  double p1 = 0.0;
  nlohmann::json votes = nlohmann::json::array(), seg_p = nlohmann::json::array();
  for (const auto& p : probs) {
    p1 += p[1];
    votes.push_back(label_from_proba(p));
    seg_p.push_back(p[1]);
  }
  p1 /= static_cast<double>(probs.size());
  return {{"p_control", 1.0 - p1},
          {"p_adhd", p1},
          {"n_segments", probs.size()},
          {"votes", votes},
          {"segment_p_adhd", seg_p},
          {"disclaimer", std::string(kEegDisclaimer)}};
}

ScreeningServer::ScreeningServer(ServerConfig cfg)
    : cfg_(std::move(cfg)), store_(cfg_.data_dir), http_(std::make_unique<httplib::Server>()) {
  routes();
}

ScreeningServer::~ScreeningServer() = default;

void ScreeningServer::add_model(const std::string& model_id, std::shared_ptr<const ResNet> model,
                                PipelineConfig pipeline) {
  std::unique_lock lock(models_mu_);
  models_[model_id] = {std::move(model), pipeline};
}

void ScreeningServer::load_model(const std::string& model_id, const std::filesystem::path& weights) {
  LoadedModel lm = load_weights(weights);
  PipelineConfig pc;
  if (lm.metadata.contains("pipeline")) pc = pipeline_config_from_json(lm.metadata.at("pipeline"));
  add_model(model_id, std::shared_ptr<const ResNet>(std::move(lm.model)), pc);
}

ModelEntry ScreeningServer::model_for(const std::string& model_id) const {
  std::shared_lock lock(models_mu_);
  if (models_.empty()) throw Error(Errc::NoModelLoaded, "no model is loaded");
  if (model_id.empty()) {
    if (models_.size() == 1) return models_.begin()->second;
    throw Error(Errc::BadConfig, "model_id is required when several models are loaded");
  }
  auto it = models_.find(model_id);
  if (it == models_.end()) throw Error(Errc::NoModelLoaded, "no model with id " + model_id);
  return it->second;
}

void ScreeningServer::routes() {
  auto& s = *http_;

  s.Post("/api/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    std::size_t n = 20;
    if (body.contains("trials_per_test")) {
      const auto& v = body.at("trials_per_test");
      if (!v.is_number_integer() || v.get<long long>() < 1)
        throw Error(Errc::BadConfig, "trials_per_test must be an integer >= 1");
      n = v.get<std::size_t>();
    }
    std::optional<std::uint64_t> seed;
    if (body.contains("seed") && !body.at("seed").is_null()) seed = body.at("seed").get<std::uint64_t>();
    const auto sess = store_.create(n, seed);
    nlohmann::json order = nlohmann::json::array();
    for (TestKind k : kTestOrder) order.push_back(std::string(to_string(k)));
    send_json(res, 201,
              {{"session_id", sess.session_id},
               {"seed", sess.seed},
               {"trials_per_test", sess.trials_per_test},
               {"n_trials", sess.trials.size()},
               {"test_order", order},
               {"status", "active"}});
  }));

  s.Get(R"(/api/v1/sessions/([^/]+)/trials/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto sess = store_.get(req.matches[1]);
    const TrialSpec* t = sess.next_trial();
    send_json(res, 200,
              {{"complete", t == nullptr},
               {"trial", t ? to_json(*t, false) : nlohmann::json(nullptr)},
               {"progress", progress(sess)}});
  }));

  s.Post(R"(/api/v1/sessions/([^/]+)/responses)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto body = parse_body(req);
    if (!body.contains("trial_id") || !body.at("trial_id").is_string())
      throw Error(Errc::BadFormat, "trial_id must be a string");
    if (!body.contains("response")) throw Error(Errc::BadFormat, "response is required");
    const auto rec = store_.submit(id, body.at("trial_id").get<std::string>(), response_text(body.at("response")),
                                   number_field(body, "stimulus_onset_ms"), number_field(body, "response_ms"));
    const auto sess = store_.get(id);
    auto out = to_json(rec);
    out["complete"] = sess.status == SessionStatus::Complete;
    out["progress"] = progress(sess);
    send_json(res, 201, out);
  }));

  s.Get(R"(/api/v1/sessions/([^/]+)/summary)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(store_.summary(req.matches[1], cfg_.thresholds)));
  }));

  s.Post("/api/v1/infer", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const ModelEntry m = model_for(req.has_param("model_id") ? req.get_param_value("model_id") : "");
    const Recording rec = parse_recording(std::string_view(req.body));
    send_json(res, 200, infer_eeg(m, rec));
  }));

  s.Get("/api/v1/models", guarded([this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(models_mu_);
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& [id, _] : models_) ids.push_back(id);
    send_json(res, 200, {{"models", ids}});
  }));

  s.Get("/api/v1/assets", guarded([](const httplib::Request&, httplib::Response& res) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& i : icon_set()) items.push_back({{"image_id", std::string(i.id)}, {"word", std::string(i.word)}});
    send_json(res, 200, {{"images", items}});
  }));

  s.Get(R"(/api/v1/assets/([^/]+))", guarded([](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto svg = icon_svg(id);
    if (!svg) {
      send_json(res, 404, {{"code", "UnknownAsset"}, {"message", "no image " + id}});
      return;
    }
    res.set_content(*svg, "image/svg+xml");
  }));

  if (!cfg_.static_dir.empty() && std::filesystem::is_directory(cfg_.static_dir)) {
    s.set_mount_point("/", cfg_.static_dir.string());
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(kIndexHtml), "text/html; charset=utf-8");
    });
  }
}

bool ScreeningServer::listen() { return http_->listen(cfg_.host, cfg_.port); }

int ScreeningServer::bind_to_any_port() { return http_->bind_to_any_port(cfg_.host); }

bool ScreeningServer::listen_after_bind() { return http_->listen_after_bind(); }

void ScreeningServer::stop() { http_->stop(); }

void ScreeningServer::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace eegscreen::screening
