#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace eegscreen::screening {

enum class TestKind { ColorPair, LineOrientation, ImageWord };
inline constexpr std::array<TestKind, 3> kTestOrder = {TestKind::ColorPair, TestKind::LineOrientation,
                                                       TestKind::ImageWord};
std::string_view to_string(TestKind kind);

// "Different" colour pairs are at least this far apart in RGB space.
inline constexpr double kMinColorDistance = 120.0;
// Reaction times above this are rejected as implausible.
inline constexpr double kMaxReactionTimeMs = 60000.0;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};
std::string to_hex(Rgb c);  // "#RRGGBB"
double rgb_distance(Rgb a, Rgb b);

// Orientation map: index k in 1..8 is the line at (k-1)*22.5 degrees,
// numbered clockwise from horizontal.
double orientation_angle(int index);

struct Icon {
  std::string_view id;
  std::string_view word;
};
const std::vector<Icon>& icon_set();  // 16 entries
const Icon* find_icon(std::string_view id);
std::optional<std::string> icon_svg(std::string_view id);  // monochrome SVG, nullopt if unknown

struct TrialSpec {
  std::string trial_id;
  TestKind kind = TestKind::ColorPair;
  // ColorPair
  Rgb left_color, right_color;
  // LineOrientation
  double angle_deg = 0.0;
  // ImageWord
  std::string image_id;
  std::string word;
  std::string correct_answer;  // same|different, "1".."8", match|mismatch
};

struct TrialRecord {
  std::string trial_id;
  std::string response;
  bool correct = false;
  double stimulus_onset_ms = 0.0;
  double response_ms = 0.0;
  double reaction_time_ms = 0.0;
};

enum class SessionStatus { Active, Complete };

struct ScreeningSession {
  std::string session_id;
  std::uint64_t seed = 0;
  std::size_t trials_per_test = 20;
  std::vector<TrialSpec> trials;  // three blocks in kTestOrder
  std::vector<TrialRecord> records;
  SessionStatus status = SessionStatus::Active;

  const TrialSpec* find_trial(std::string_view trial_id) const;
  const TrialRecord* find_record(std::string_view trial_id) const;
  // First trial (in issue order) without a record.
  const TrialSpec* next_trial() const;
};

// Deterministic in (seed, trials_per_test). Each binary block holds
// floor(n/2) of one answer and the rest of the other, in shuffled order.
// Throws Error(BadConfig) for trials_per_test == 0.
std::vector<TrialSpec> generate_trials(std::uint64_t seed, std::size_t trials_per_test);

ScreeningSession make_session(std::string session_id, std::uint64_t seed, std::size_t trials_per_test);

bool in_domain(TestKind kind, std::string_view response);

// Validates and scores a response without touching the session.
// Throws UnknownTrial, DuplicateResponse, NonPositiveReactionTime,
// ImplausibleReactionTime or OutOfDomainResponse.
TrialRecord score_response(const ScreeningSession& s, std::string_view trial_id, std::string_view response,
                           double stimulus_onset_ms, double response_ms);

// Appends a scored record and updates status.
void apply_record(ScreeningSession& s, TrialRecord record);

struct Thresholds {
  double min_accuracy = 0.8;
  double max_median_rt_ms = 1500.0;
};

struct TestSummary {
  TestKind kind = TestKind::ColorPair;
  std::size_t n_trials = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  double median_rt_ms = 0.0;
};

inline constexpr std::string_view kDisclaimer =
    "This screening result is not a diagnosis. The thresholds are operating defaults that are not clinically "
    "validated. Consult a qualified clinician for any assessment of ADHD.";

struct SessionSummary {
  std::string session_id;
  std::vector<TestSummary> tests;
  std::string flag;  // "typical" or "review-recommended"
  Thresholds thresholds;
  std::string disclaimer{kDisclaimer};
};

double median(std::vector<double> values);

// Throws Error(SessionIncomplete) unless every trial is answered.
SessionSummary summarize(const ScreeningSession& s, const Thresholds& t = {});

nlohmann::json to_json(const TrialSpec& t, bool include_answer);
TrialSpec trial_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrialRecord& r);
TrialRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScreeningSession& s);
nlohmann::json to_json(const SessionSummary& s);

}  // namespace eegscreen::screening
