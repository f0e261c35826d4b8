#include "eegscreen/service/session_store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>

#include "eegscreen/error.hpp"

namespace eegscreen::screening {

namespace fs = std::filesystem;

static std::uint64_t entropy() {
  std::random_device rd;
  const auto now = static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
  return (static_cast<std::uint64_t>(rd()) << 32 ^ rd()) ^ now;
}

SessionStore::SessionStore(fs::path data_dir) : dir_(std::move(data_dir)), rng_(entropy()) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir_.string() + ": " + ec.message());
  std::vector<fs::path> logs;
  for (const auto& e : fs::directory_iterator(dir_))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") logs.push_back(e.path());
  std::sort(logs.begin(), logs.end());
  for (const auto& p : logs) replay(p);
}

fs::path SessionStore::log_path(const std::string& session_id) const { return dir_ / (session_id + ".jsonl"); }

void SessionStore::replay(const fs::path& log) {
  std::ifstream in(log);
  if (!in) throw Error(Errc::Io, "cannot read " + log.string());
  auto e = std::make_unique<Entry>();
  std::string line;
  std::size_t lineno = 0;
  bool created = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json ev;
    try {
      ev = nlohmann::json::parse(line);
      const std::string kind = ev.at("event").get<std::string>();
      if (kind == "created") {
        ScreeningSession& s = e->session;
        s.session_id = ev.at("session_id").get<std::string>();
        s.seed = ev.at("seed").get<std::uint64_t>();
        s.trials_per_test = ev.at("trials_per_test").get<std::size_t>();
        for (const auto& t : ev.at("trials")) s.trials.push_back(trial_from_json(t));
        created = true;
      } else if (kind == "response" && created) {
        apply_record(e->session, record_from_json(ev.at("record")));
      } else {
        throw Error(Errc::BadFormat, "unexpected event " + kind);
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::BadFormat, log.string() + " line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (!created) throw Error(Errc::BadFormat, log.string() + " has no created event");
  const std::string id = e->session.session_id;
  sessions_.emplace(id, std::move(e));
}

void SessionStore::append(const std::string& session_id, const nlohmann::json& event) const {
  if (dir_.empty()) return;
  std::ofstream out(log_path(session_id), std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "cannot append to " + log_path(session_id).string());
}

SessionStore::Entry& SessionStore::entry(const std::string& session_id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, "no session " + session_id);
  return *it->second;
}

ScreeningSession SessionStore::create(std::size_t trials_per_test, std::optional<std::uint64_t> seed) {
  std::string id;
  std::uint64_t s;
  {
    std::lock_guard lock(rng_mu_);
    s = seed ? *seed : rng_();
    std::shared_lock map_lock(map_mu_);
    do {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_()));
      id = buf;
    } while (sessions_.count(id));
  }
  auto e = std::make_unique<Entry>();
  e->session = make_session(id, s, trials_per_test);
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : e->session.trials) trials.push_back(to_json(t, true));
  append(id, {{"event", "created"}, {"session_id", id}, {"seed", s}, {"trials_per_test", trials_per_test}, {"trials", trials}});
  ScreeningSession copy = e->session;
  std::unique_lock lock(map_mu_);
  sessions_.emplace(id, std::move(e));
  return copy;
}

ScreeningSession SessionStore::get(const std::string& session_id) const {
  Entry& e = entry(session_id);
  std::lock_guard lock(e.mu);
  return e.session;
}

std::optional<TrialSpec> SessionStore::next_trial(const std::string& session_id) const {
  Entry& e = entry(session_id);
  std::lock_guard lock(e.mu);
  const TrialSpec* t = e.session.next_trial();
  if (!t) return std::nullopt;
  return *t;
}

TrialRecord SessionStore::submit(const std::string& session_id, const std::string& trial_id,
                                 const std::string& response, double stimulus_onset_ms, double response_ms) {
  Entry& e = entry(session_id);
  std::lock_guard lock(e.mu);
  TrialRecord r = score_response(e.session, trial_id, response, stimulus_onset_ms, response_ms);
  append(session_id, {{"event", "response"}, {"record", to_json(r)}});
  apply_record(e.session, r);
  return r;
}

SessionSummary SessionStore::summary(const std::string& session_id, const Thresholds& t) const {
  Entry& e = entry(session_id);
  std::lock_guard lock(e.mu);
  return summarize(e.session, t);
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(map_mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

}  // namespace eegscreen::screening
