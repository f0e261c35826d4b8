#include "eegscreen/service/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "eegscreen/error.hpp"
#include "eegscreen/rng.hpp"

namespace eegscreen::screening {

std::string_view to_string(TestKind kind) {
  switch (kind) {
    case TestKind::ColorPair: return "ColorPair";
    case TestKind::LineOrientation: return "LineOrientation";
    case TestKind::ImageWord: return "ImageWord";
  }
  return "?";
}

static TestKind parse_kind(std::string_view s) {
  for (TestKind k : kTestOrder)
    if (to_string(k) == s) return k;
  throw Error(Errc::BadFormat, "unknown test kind " + std::string(s));
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
  return buf;
}

static Rgb parse_hex(std::string_view s) {
  unsigned r = 0, g = 0, b = 0;
  if (s.size() != 7 || std::sscanf(std::string(s).c_str(), "#%02x%02x%02x", &r, &g, &b) != 3)
    throw Error(Errc::BadFormat, "bad colour " + std::string(s));
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

double rgb_distance(Rgb a, Rgb b) {
  const double dr = double(a.r) - b.r, dg = double(a.g) - b.g, db = double(a.b) - b.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

double orientation_angle(int index) { return (index - 1) * 22.5; }

// Icons are drawn on a 100x100 canvas in a single colour.
namespace {
struct IconArt {
  Icon icon;
  std::string_view body;
};

const std::vector<IconArt>& icon_art() {
  static const std::vector<IconArt> art = {
      {{"star", "star"}, R"(<polygon points="50,8 61,38 93,38 67,57 77,89 50,70 23,89 33,57 7,38 39,38"/>)"},
      {{"heart", "heart"}, R"(<path d="M50 88 L14 52 A20 20 0 0 1 50 24 A20 20 0 0 1 86 52 Z"/>)"},
      {{"moon", "moon"}, R"(<path d="M62 10 A40 40 0 1 0 90 70 A32 32 0 1 1 62 10 Z"/>)"},
      {{"sun", "sun"},
       R"(<circle cx="50" cy="50" r="20"/><g stroke="black" stroke-width="6"><line x1="50" y1="4" x2="50" y2="20"/><line x1="50" y1="80" x2="50" y2="96"/><line x1="4" y1="50" x2="20" y2="50"/><line x1="80" y1="50" x2="96" y2="50"/><line x1="17" y1="17" x2="28" y2="28"/><line x1="72" y1="72" x2="83" y2="83"/><line x1="17" y1="83" x2="28" y2="72"/><line x1="72" y1="28" x2="83" y2="17"/></g>)"},
      {{"house", "house"}, R"(<polygon points="50,10 90,45 80,45 80,90 20,90 20,45 10,45"/>)"},
      {{"tree", "tree"}, R"(<polygon points="50,6 82,62 18,62"/><rect x="42" y="62" width="16" height="30"/>)"},
      {{"cloud", "cloud"},
       R"(<circle cx="35" cy="55" r="18"/><circle cx="55" cy="42" r="22"/><circle cx="72" cy="58" r="16"/><rect x="30" y="58" width="45" height="16"/>)"},
      {{"arrow", "arrow"}, R"(<polygon points="8,42 60,42 60,22 92,50 60,78 60,58 8,58"/>)"},
      {{"key", "key"},
       R"(<circle cx="28" cy="50" r="18"/><rect x="40" y="45" width="52" height="10"/><rect x="76" y="55" width="8" height="14"/><rect x="62" y="55" width="8" height="10"/>)"},
      {{"bell", "bell"},
       R"(<path d="M50 10 A28 28 0 0 1 78 38 L78 66 L88 78 L12 78 L22 66 L22 38 A28 28 0 0 1 50 10 Z"/><circle cx="50" cy="86" r="8"/>)"},
      {{"cup", "cup"},
       R"(<path d="M18 24 L72 24 L66 86 L24 86 Z"/><path d="M72 36 A14 14 0 0 1 72 64" fill="none" stroke="black" stroke-width="7"/>)"},
      {{"flag", "flag"}, R"(<rect x="16" y="8" width="7" height="86"/><polygon points="23,10 86,26 23,44"/>)"},
      {{"drop", "drop"}, R"(<path d="M50 8 C50 8 20 48 20 64 A30 30 0 0 0 80 64 C80 48 50 8 50 8 Z"/>)"},
      {{"leaf", "leaf"},
       R"(<path d="M14 86 C14 30 50 12 90 10 C88 50 70 86 14 86 Z"/><line x1="14" y1="86" x2="62" y2="38" stroke="white" stroke-width="4"/>)"},
      {{"bolt", "lightning"}, R"(<polygon points="58,4 18,56 46,56 38,96 82,40 54,40"/>)"},
      {{"umbrella", "umbrella"},
       R"(<path d="M6 50 A44 44 0 0 1 94 50 Z"/><rect x="47" y="50" width="6" height="34"/><path d="M50 84 A10 10 0 0 1 30 84" fill="none" stroke="black" stroke-width="6"/>)"},
  };
  return art;
}
}  // namespace

const std::vector<Icon>& icon_set() {
  static const std::vector<Icon> icons = [] {
    std::vector<Icon> out;
    for (const auto& a : icon_art()) out.push_back(a.icon);
    return out;
  }();
  return icons;
}

const Icon* find_icon(std::string_view id) {
  for (const auto& i : icon_set())
    if (i.id == id) return &i;
  return nullptr;
}

std::optional<std::string> icon_svg(std::string_view id) {
  for (const auto& a : icon_art()) {
    if (a.icon.id != id) continue;
    return R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 100 100" width="200" height="200" fill="black">)" +
           std::string(a.body) + "</svg>\n";
  }
  return std::nullopt;
}

const TrialSpec* ScreeningSession::find_trial(std::string_view trial_id) const {
  for (const auto& t : trials)
    if (t.trial_id == trial_id) return &t;
  return nullptr;
}

const TrialRecord* ScreeningSession::find_record(std::string_view trial_id) const {
  for (const auto& r : records)
    if (r.trial_id == trial_id) return &r;
  return nullptr;
}

const TrialSpec* ScreeningSession::next_trial() const {
  for (const auto& t : trials)
    if (!find_record(t.trial_id)) return &t;
  return nullptr;
}

namespace {

// n/2 "true" flags, with the odd one decided by a coin, in shuffled order.
std::vector<bool> balanced_flags(std::size_t n, SplitMix64& rng) {
  std::vector<bool> flags(n, false);
  std::size_t n_true = n / 2;
  if (n % 2 == 1 && rng.below(2) == 1) ++n_true;
  std::fill(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(n_true), true);
  shuffle(flags.begin(), flags.end(), rng);
  return flags;
}

Rgb random_color(SplitMix64& rng) {
  return {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
          static_cast<std::uint8_t>(rng.below(256))};
}

std::string trial_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%03zu", i + 1);
  return buf;
}

}  // namespace

std::vector<TrialSpec> generate_trials(std::uint64_t seed, std::size_t trials_per_test) {
  if (trials_per_test == 0) throw Error(Errc::BadConfig, "trials_per_test must be >= 1");
  std::vector<TrialSpec> out;
  const auto& icons = icon_set();
  for (std::size_t b = 0; b < kTestOrder.size(); ++b) {
    SplitMix64 rng(derive_seed(seed, b));
    const TestKind kind = kTestOrder[b];
    const auto flags = balanced_flags(trials_per_test, rng);
    for (std::size_t i = 0; i < trials_per_test; ++i) {
      TrialSpec t;
      t.trial_id = trial_id(out.size());
      t.kind = kind;
      switch (kind) {
        case TestKind::ColorPair:
          t.left_color = random_color(rng);
          if (flags[i]) {
            t.right_color = t.left_color;
            t.correct_answer = "same";
          } else {
            do t.right_color = random_color(rng);
            while (rgb_distance(t.left_color, t.right_color) < kMinColorDistance);
            t.correct_answer = "different";
          }
          break;
        case TestKind::LineOrientation: {
          const int index = static_cast<int>(rng.below(8)) + 1;
          t.angle_deg = orientation_angle(index);
          t.correct_answer = std::to_string(index);
          break;
        }
        case TestKind::ImageWord: {
          const std::size_t img = rng.below(icons.size());
          t.image_id = std::string(icons[img].id);
          if (flags[i]) {
            t.word = std::string(icons[img].word);
            t.correct_answer = "match";
          } else {
            std::size_t other = rng.below(icons.size() - 1);
            if (other >= img) ++other;
            t.word = std::string(icons[other].word);
            t.correct_answer = "mismatch";
          }
          break;
        }
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

ScreeningSession make_session(std::string session_id, std::uint64_t seed, std::size_t trials_per_test) {
  ScreeningSession s;
  s.session_id = std::move(session_id);
  s.seed = seed;
  s.trials_per_test = trials_per_test;
  s.trials = generate_trials(seed, trials_per_test);
  return s;
}

bool in_domain(TestKind kind, std::string_view r) {
  switch (kind) {
    case TestKind::ColorPair: return r == "same" || r == "different";
    case TestKind::LineOrientation: return r.size() == 1 && r[0] >= '1' && r[0] <= '8';
    case TestKind::ImageWord: return r == "match" || r == "mismatch";
  }
  return false;
}

TrialRecord score_response(const ScreeningSession& s, std::string_view trial_id, std::string_view response,
                           double stimulus_onset_ms, double response_ms) {
  const TrialSpec* t = s.find_trial(trial_id);
  if (!t) throw Error(Errc::UnknownTrial, "no trial " + std::string(trial_id) + " in session " + s.session_id);
  if (s.find_record(trial_id)) throw Error(Errc::DuplicateResponse, "trial " + std::string(trial_id) + " already answered");
  if (!std::isfinite(stimulus_onset_ms) || !std::isfinite(response_ms))
    throw Error(Errc::NonPositiveReactionTime, "timestamps must be finite");
  const double rt = response_ms - stimulus_onset_ms;
  if (!(rt > 0.0)) throw Error(Errc::NonPositiveReactionTime, "response_ms must be after stimulus_onset_ms");
  if (rt > kMaxReactionTimeMs) throw Error(Errc::ImplausibleReactionTime, "reaction time exceeds 60 s");
  if (!in_domain(t->kind, response))
    throw Error(Errc::OutOfDomainResponse,
                "response '" + std::string(response) + "' is not valid for " + std::string(to_string(t->kind)));
  TrialRecord r;
  r.trial_id = std::string(trial_id);
  r.response = std::string(response);
  r.correct = response == t->correct_answer;
  r.stimulus_onset_ms = stimulus_onset_ms;
  r.response_ms = response_ms;
  r.reaction_time_ms = rt;
  return r;
}

void apply_record(ScreeningSession& s, TrialRecord record) {
  s.records.push_back(std::move(record));
  s.status = s.records.size() == s.trials.size() ? SessionStatus::Complete : SessionStatus::Active;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SessionSummary summarize(const ScreeningSession& s, const Thresholds& th) {
  if (s.status != SessionStatus::Complete)
    throw Error(Errc::SessionIncomplete, std::to_string(s.trials.size() - s.records.size()) + " trials unanswered");
  SessionSummary out;
  out.session_id = s.session_id;
  out.thresholds = th;
  bool review = false;
  for (TestKind kind : kTestOrder) {
    TestSummary ts;
    ts.kind = kind;
    std::vector<double> rts;
    for (const auto& t : s.trials) {
      if (t.kind != kind) continue;
      const TrialRecord* r = s.find_record(t.trial_id);
      ++ts.n_trials;
      ts.n_correct += r->correct ? 1 : 0;
      rts.push_back(r->reaction_time_ms);
    }
    ts.accuracy = static_cast<double>(ts.n_correct) / static_cast<double>(ts.n_trials);
    ts.median_rt_ms = median(rts);
    review = review || ts.accuracy < th.min_accuracy || ts.median_rt_ms > th.max_median_rt_ms;
    out.tests.push_back(ts);
  }
  out.flag = review ? "review-recommended" : "typical";
  return out;
}

nlohmann::json to_json(const TrialSpec& t, bool include_answer) {
  nlohmann::json stim;
  switch (t.kind) {
    case TestKind::ColorPair:
      stim = {{"left_color", to_hex(t.left_color)}, {"right_color", to_hex(t.right_color)}};
      break;
    case TestKind::LineOrientation:
      stim = {{"angle_deg", t.angle_deg}};
      break;
    case TestKind::ImageWord:
      stim = {{"image_id", t.image_id}, {"word", t.word}};
      break;
  }
  nlohmann::json j = {{"trial_id", t.trial_id}, {"test_kind", std::string(to_string(t.kind))}, {"stimulus", stim}};
  if (include_answer) j["correct_answer"] = t.correct_answer;
  return j;
}

TrialSpec trial_from_json(const nlohmann::json& j) {
  TrialSpec t;
  t.trial_id = j.at("trial_id").get<std::string>();
  t.kind = parse_kind(j.at("test_kind").get<std::string>());
  const auto& st = j.at("stimulus");
  switch (t.kind) {
    case TestKind::ColorPair:
      t.left_color = parse_hex(st.at("left_color").get<std::string>());
      t.right_color = parse_hex(st.at("right_color").get<std::string>());
      break;
    case TestKind::LineOrientation:
      t.angle_deg = st.at("angle_deg").get<double>();
      break;
    case TestKind::ImageWord:
      t.image_id = st.at("image_id").get<std::string>();
      t.word = st.at("word").get<std::string>();
      break;
  }
  t.correct_answer = j.at("correct_answer").get<std::string>();
  return t;
}

nlohmann::json to_json(const TrialRecord& r) {
  return {{"trial_id", r.trial_id},
          {"response", r.response},
          {"correct", r.correct},
          {"stimulus_onset_ms", r.stimulus_onset_ms},
          {"response_ms", r.response_ms},
          {"reaction_time_ms", r.reaction_time_ms}};
}

TrialRecord record_from_json(const nlohmann::json& j) {
  TrialRecord r;
  r.trial_id = j.at("trial_id").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  r.stimulus_onset_ms = j.at("stimulus_onset_ms").get<double>();
  r.response_ms = j.at("response_ms").get<double>();
  r.reaction_time_ms = j.at("reaction_time_ms").get<double>();
  return r;
}

nlohmann::json to_json(const ScreeningSession& s) {
  nlohmann::json trials = nlohmann::json::array(), records = nlohmann::json::array();
  for (const auto& t : s.trials) trials.push_back(to_json(t, true));
  for (const auto& r : s.records) records.push_back(to_json(r));
  return {{"session_id", s.session_id},
          {"seed", s.seed},
          {"trials_per_test", s.trials_per_test},
          {"status", s.status == SessionStatus::Complete ? "complete" : "active"},
          {"trials", trials},
          {"records", records}};
}

nlohmann::json to_json(const SessionSummary& s) {
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : s.tests) {
    tests.push_back({{"test_kind", std::string(to_string(t.kind))},
                     {"n_trials", t.n_trials},
                     {"n_correct", t.n_correct},
                     {"accuracy", t.accuracy},
                     {"median_rt_ms", t.median_rt_ms}});
  }
  return {{"session_id", s.session_id},
          {"tests", tests},
          {"flag", s.flag},
          {"thresholds",
           {{"min_accuracy", s.thresholds.min_accuracy},
            {"max_median_rt_ms", s.thresholds.max_median_rt_ms},
            {"clinically_validated", false}}},
          {"disclaimer", s.disclaimer}};
}

}  // namespace eegscreen::screening
