#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "eegscreen/rng.hpp"
#include "eegscreen/service/screening.hpp"

namespace eegscreen::screening {

// Sessions keyed by id. With a data directory every session is an
// append-only JSON-lines log (<dir>/<id>.jsonl): one "created" event holding
// the full trial list, then one "response" event per answer. The log is
// written before in-memory state changes, and replayed on construction.
// Mutations of one session are serialised; different sessions are independent.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir = {});

  ScreeningSession create(std::size_t trials_per_test, std::optional<std::uint64_t> seed = std::nullopt);
  ScreeningSession get(const std::string& session_id) const;
  std::optional<TrialSpec> next_trial(const std::string& session_id) const;
  TrialRecord submit(const std::string& session_id, const std::string& trial_id, const std::string& response,
                     double stimulus_onset_ms, double response_ms);
  SessionSummary summary(const std::string& session_id, const Thresholds& t = {}) const;

  std::vector<std::string> session_ids() const;
  const std::filesystem::path& data_dir() const { return dir_; }
  std::filesystem::path log_path(const std::string& session_id) const;

 private:
  struct Entry {
    mutable std::mutex mu;
    ScreeningSession session;
  };

  Entry& entry(const std::string& session_id) const;
  void append(const std::string& session_id, const nlohmann::json& event) const;
  void replay(const std::filesystem::path& log);

  std::filesystem::path dir_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::mutex rng_mu_;
  SplitMix64 rng_;
};

}  // namespace eegscreen::screening
