#include <doctest.h>

#include <set>

#include "eegscreen/error.hpp"
#include "eegscreen/service/screening.hpp"
#include "helpers.hpp"

using namespace eegscreen;
using namespace eegscreen::screening;
using testing::error_code_of;

namespace {

// Answers every trial correctly (or not) with a fixed reaction time.
void answer_all(ScreeningSession& s, double rt, bool correct = true) {
  double t = 1000.0;
  while (const TrialSpec* trial = s.next_trial()) {
    std::string resp = trial->correct_answer;
    if (!correct) {
      if (trial->kind == TestKind::LineOrientation) resp = resp == "1" ? "2" : "1";
      else if (trial->kind == TestKind::ColorPair) resp = resp == "same" ? "different" : "same";
      else resp = resp == "match" ? "mismatch" : "match";
    }
    apply_record(s, score_response(s, trial->trial_id, resp, t, t + rt));
    t += 5000.0;
  }
}

}  // namespace

TEST_CASE("session layout") {
  const auto s = make_session("abc", 7, 5);
  REQUIRE(s.trials.size() == 15);
  for (std::size_t i = 0; i < 15; ++i) CHECK(s.trials[i].kind == kTestOrder[i / 5]);
  CHECK(s.trials[0].trial_id == "t001");
  CHECK(s.trials[14].trial_id == "t015");
  CHECK(to_json(make_session("abc", 7, 5)).dump() == to_json(s).dump());
  CHECK(error_code_of([] { make_session("x", 1, 0); }) == Errc::BadConfig);
}

TEST_CASE("stimulus and answer agree for every generated trial") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto trials = generate_trials(seed, 1 + seed % 25);
    std::size_t same = 0, match = 0, colors = 0, words = 0;
    for (const auto& t : trials) {
      switch (t.kind) {
        case TestKind::ColorPair:
          ++colors;
          if (t.correct_answer == "same") {
            ++same;
            CHECK(t.left_color == t.right_color);
          } else {
            REQUIRE(t.correct_answer == "different");
            CHECK(rgb_distance(t.left_color, t.right_color) >= kMinColorDistance);
          }
          break;
        case TestKind::LineOrientation: {
          const int idx = std::stoi(t.correct_answer);
          CHECK(idx >= 1);
          CHECK(idx <= 8);
          CHECK(t.angle_deg == orientation_angle(idx));
          break;
        }
        case TestKind::ImageWord: {
          ++words;
          const Icon* icon = find_icon(t.image_id);
          REQUIRE(icon != nullptr);
          if (t.correct_answer == "match") {
            ++match;
            CHECK(t.word == icon->word);
          } else {
            REQUIRE(t.correct_answer == "mismatch");
            CHECK(t.word != icon->word);
            bool known = false;
            for (const auto& i : icon_set()) known = known || i.word == t.word;
            CHECK(known);
          }
          break;
        }
      }
    }
    // balanced to within the one odd trial
    CHECK(2 * same + 1 >= colors);
    CHECK(2 * same <= colors + 1);
    CHECK(2 * match + 1 >= words);
    CHECK(2 * match <= words + 1);
  }
}

TEST_CASE("orientation draws cover the map uniformly") {
  std::vector<int> counts(9, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (const auto& t : generate_trials(seed, 40))
      if (t.kind == TestKind::LineOrientation) ++counts[std::stoi(t.correct_answer)];
  for (int i = 1; i <= 8; ++i) {
    CHECK(counts[i] > 400);
    CHECK(counts[i] < 600);
  }
  CHECK(orientation_angle(1) == 0.0);
  CHECK(orientation_angle(8) == 157.5);
}

TEST_CASE("scoring") {
  auto s = make_session("s", 3, 4);
  const TrialSpec& first = s.trials[0];
  const auto rec = score_response(s, first.trial_id, first.correct_answer, 100.0, 450.0);
  CHECK(rec.correct);
  CHECK(rec.reaction_time_ms == 350.0);
  if (first.correct_answer == "same") CHECK(first.left_color == first.right_color);

  CHECK(error_code_of([&] { score_response(s, "t999", "same", 0, 1); }) == Errc::UnknownTrial);
  CHECK(error_code_of([&] { score_response(s, first.trial_id, "same", 500, 500); }) ==
        Errc::NonPositiveReactionTime);
  CHECK(error_code_of([&] { score_response(s, first.trial_id, "same", 0, 60001); }) ==
        Errc::ImplausibleReactionTime);
  CHECK(error_code_of([&] { score_response(s, first.trial_id, "maybe", 0, 10); }) == Errc::OutOfDomainResponse);
  const TrialSpec& line = s.trials[4];
  REQUIRE(line.kind == TestKind::LineOrientation);
  CHECK(error_code_of([&] { score_response(s, line.trial_id, "9", 0, 10); }) == Errc::OutOfDomainResponse);
  CHECK(error_code_of([&] { score_response(s, line.trial_id, "0", 0, 10); }) == Errc::OutOfDomainResponse);
  CHECK(in_domain(TestKind::LineOrientation, "8"));
  CHECK_FALSE(in_domain(TestKind::ImageWord, "same"));

  apply_record(s, rec);
  CHECK(error_code_of([&] { score_response(s, first.trial_id, first.correct_answer, 0, 10); }) ==
        Errc::DuplicateResponse);
  CHECK(s.next_trial() == &s.trials[1]);
  CHECK(error_code_of([&] { summarize(s); }) == Errc::SessionIncomplete);
}

TEST_CASE("summary arithmetic and flags") {
  CHECK(median({300, 500, 400}) == 400.0);
  CHECK(median({300, 500}) == 400.0);

  auto good = make_session("g", 5, 6);
  answer_all(good, 600.0);
  CHECK(good.status == SessionStatus::Complete);
  const auto sum = summarize(good);
  REQUIRE(sum.tests.size() == 3);
  for (const auto& t : sum.tests) {
    CHECK(t.accuracy == 1.0);
    CHECK(t.median_rt_ms == 600.0);
    CHECK(t.n_trials == 6);
  }
  CHECK(sum.flag == "typical");
  CHECK(sum.disclaimer.find("not a diagnosis") != std::string::npos);

  auto slow = make_session("s", 5, 6);
  answer_all(slow, 1600.0);
  CHECK(summarize(slow).flag == "review-recommended");
  CHECK(summarize(slow, Thresholds{0.8, 2000.0}).flag == "typical");

  // 3 of 4 correct in the first block
  auto part = make_session("p", 9, 4);
  double t = 0;
  for (std::size_t i = 0; i < part.trials.size(); ++i) {
    const auto& tr = part.trials[i];
    std::string resp = tr.correct_answer;
    if (i == 0) resp = resp == "same" ? "different" : "same";
    apply_record(part, score_response(part, tr.trial_id, resp, t, t + 300));
    t += 1000;
  }
  const auto ps = summarize(part);
  CHECK(ps.tests[0].accuracy == 0.75);
  CHECK(ps.tests[0].n_correct == 3);
  CHECK(ps.flag == "review-recommended");

  // accuracy equals the tally of correct records
  auto wrong = make_session("w", 2, 5);
  answer_all(wrong, 300.0, false);
  for (const auto& ts : summarize(wrong).tests) CHECK(ts.accuracy == 0.0);

  const auto j = to_json(sum);
  CHECK(j.at("thresholds").at("clinically_validated") == false);
  CHECK(j.at("flag") == "typical");
}

TEST_CASE("json round trips") {
  auto s = make_session("r", 11, 3);
  answer_all(s, 420.0);
  for (const auto& t : s.trials) {
    const auto back = trial_from_json(to_json(t, true));
    CHECK(to_json(back, true) == to_json(t, true));
    CHECK_FALSE(to_json(t, false).contains("correct_answer"));
  }
  for (const auto& r : s.records) CHECK(to_json(record_from_json(to_json(r))) == to_json(r));
}

TEST_CASE("icons") {
  CHECK(icon_set().size() == 16);
  std::set<std::string_view> ids, words;
  for (const auto& i : icon_set()) {
    ids.insert(i.id);
    words.insert(i.word);
    const auto svg = icon_svg(i.id);
    REQUIRE(svg.has_value());
    CHECK(svg->rfind("<svg", 0) == 0);
  }
  CHECK(ids.size() == 16);
  CHECK(words.size() == 16);
  CHECK_FALSE(icon_svg("dragon").has_value());
  CHECK(to_hex(Rgb{255, 0, 16}) == "#FF0010");
}
