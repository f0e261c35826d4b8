#include <doctest.h>

#include <cmath>
#include <set>

#include "eegscreen/evaluation.hpp"
#include "helpers.hpp"
#include "planted.hpp"

using namespace eegscreen;
using testing::error_code_of;

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

// Brute-force metrics straight from the definitions.
struct Oracle {
  double precision[2], recall[2], f1[2], support[2], accuracy;
};

Oracle brute(const std::vector<int>& y, const std::vector<int>& p) {
  Oracle o{};
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += y[i] == p[i];
  o.accuracy = double(correct) / double(y.size());
  for (int c = 0; c < 2; ++c) {
    double hit = 0, predicted = 0, actual = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      hit += y[i] == c && p[i] == c;
      predicted += p[i] == c;
      actual += y[i] == c;
    }
    o.precision[c] = predicted ? hit / predicted : 0.0;
    o.recall[c] = actual ? hit / actual : 0.0;
    const double s = o.precision[c] + o.recall[c];
    o.f1[c] = s ? 2 * o.precision[c] * o.recall[c] / s : 0.0;
    o.support[c] = actual;
  }
  return o;
}

}  // namespace

TEST_CASE("confusion examples") {
  const std::vector<int> a{0, 1, 0, 1};
  const auto cm = confusion(a, a);
  CHECK(cm.tn == 2);
  CHECK(cm.tp == 2);
  CHECK(cm.fp == 0);
  CHECK(cm.fn == 0);
  const std::vector<int> zeros{0, 0}, ones{1, 1};
  CHECK(confusion(zeros, ones).fp == 2);
  const std::vector<int> none;
  CHECK(error_code_of([&] { confusion(none, none); }) == Errc::LengthMismatch);
  CHECK(error_code_of([&] { confusion(a, zeros); }) == Errc::LengthMismatch);
  const std::vector<int> two{2, 0};
  CHECK(error_code_of([&] { confusion(two, zeros); }) == Errc::BadLabel);
}

TEST_CASE("report matches brute force on every list up to length 8") {
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (unsigned ybits = 0; ybits < (1u << n); ++ybits) {
      for (unsigned pbits = 0; pbits < (1u << n); ++pbits) {
        std::vector<int> y(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
          y[i] = (ybits >> i) & 1;
          p[i] = (pbits >> i) & 1;
        }
        const auto r = report(confusion(y, p));
        const auto o = brute(y, p);
        bool ok = std::abs(r.accuracy - o.accuracy) < 1e-12;
        double wp = 0, wr = 0, wf = 0;
        for (int c = 0; c < 2; ++c) {
          ok = ok && std::abs(r.per_class[c].precision - o.precision[c]) < 1e-12 &&
               std::abs(r.per_class[c].recall - o.recall[c]) < 1e-12 &&
               std::abs(r.per_class[c].f1 - o.f1[c]) < 1e-12 && r.per_class[c].support == o.support[c];
          wp += o.precision[c] * o.support[c] / double(n);
          wr += o.recall[c] * o.support[c] / double(n);
          wf += o.f1[c] * o.support[c] / double(n);
        }
        ok = ok && std::abs(r.macro.precision - (o.precision[0] + o.precision[1]) / 2) < 1e-12 &&
             std::abs(r.macro.recall - (o.recall[0] + o.recall[1]) / 2) < 1e-12 &&
             std::abs(r.macro.f1 - (o.f1[0] + o.f1[1]) / 2) < 1e-12;
        ok = ok && std::abs(r.weighted.precision - wp) < 1e-12 && std::abs(r.weighted.recall - wr) < 1e-12 &&
             std::abs(r.weighted.f1 - wf) < 1e-12;
        if (!ok) FAIL("mismatch for n=" << n << " y=" << ybits << " p=" << pbits);
        ++cases;
      }
    }
  }
  CHECK(cases == 87380);
}

TEST_CASE("degenerate denominators are flagged zeros") {
  const std::vector<int> y{0, 0, 0}, p{0, 0, 0};
  const auto r = report(confusion(y, p));
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].recall == 0.0);
  CHECK(r.flags == std::vector<std::string>{"precision_1_undefined", "recall_1_undefined"});
  const auto perfect = report(confusion(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 1}));
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro.f1 == 1.0);
  CHECK(perfect.weighted.precision == 1.0);
  CHECK(perfect.flags.empty());
}

TEST_CASE("table arithmetic from the published per-class rows") {
  // Class 1 reproduces its printed F1; class 0 lands on 0.8748.
  CHECK(std::abs(f1_score(0.98, 0.79) - 0.8748) < 5e-5);
  CHECK(round2(f1_score(0.86, 0.99)) == 0.92);
  const std::vector<ClassMetrics> rows{{0.98, 0.79, f1_score(0.98, 0.79), 0}, {0.86, 0.99, f1_score(0.86, 0.99), 0}};
  const auto m = macro_average(rows);
  CHECK(round2(m.precision) == 0.92);
  CHECK(round2(m.recall) == 0.89);
  CHECK(round2(m.f1) == 0.90);
}

TEST_CASE("format_table layout") {
  const auto r = report(confusion(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 0, 0}));
  const auto t = format_table(r);
  const auto first = t.substr(0, t.find('\n'));
  const auto pp = first.find("Precision"), rp = first.find("Recall"), fp = first.find("F1-Score");
  CHECK(pp != std::string::npos);
  CHECK(pp < rp);
  CHECK(rp < fp);
  for (const char* row : {"0 (No ADHD)", "1 (ADHD)", "Accuracy", "Macro avg", "Weighted avg"})
    CHECK(t.find(row) != std::string::npos);
  CHECK(t.find("0.75") != std::string::npos);
}

TEST_CASE("fold plans") {
  std::vector<SubjectLabel> subjects;
  for (int i = 0; i < 121; ++i) subjects.push_back({"s" + std::to_string(i), i < 61 ? Label::Adhd : Label::Control});
  const auto plan = make_folds(subjects, 5, 3);
  auto sizes = plan.fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{24, 24, 24, 24, 25});
  CHECK(plan.assignments.size() == 121);
  // per-class balance
  for (Label cls : {Label::Adhd, Label::Control}) {
    std::vector<std::size_t> per(5, 0);
    for (const auto& s : subjects)
      if (s.label == cls) ++per[plan.assignments.at(s.subject_id)];
    CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
  }
  CHECK(make_folds(subjects, 5, 3).assignments == plan.assignments);
  CHECK(make_folds(subjects, 5, 4).assignments != plan.assignments);
  CHECK(fold_plan_from_json(to_json(plan)).assignments == plan.assignments);

  std::vector<SubjectLabel> four;
  for (int i = 0; i < 4; ++i) four.push_back({"s" + std::to_string(i), i % 2 ? Label::Adhd : Label::Control});
  CHECK(error_code_of([&] { make_folds(four, 5, 0); }) == Errc::TooFewSubjects);
  subjects[1].subject_id = "s0";
  CHECK(error_code_of([&] { make_folds(subjects, 5, 0); }) == Errc::DuplicateSubject);
}

TEST_CASE("majority vote") {
  CHECK(majority_vote(std::vector<int>{1, 1, 0}) == 1);
  CHECK(majority_vote(std::vector<int>{1, 0}) == 0);
  CHECK(majority_vote(std::vector<int>{0}) == 0);
  CHECK(majority_vote(std::vector<int>{1}) == 1);
}

TEST_CASE("mean report") {
  const auto perfect = report(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1}));
  const std::vector<MetricsReport> folds(5, perfect);
  const auto m = mean_report(folds);
  CHECK(m.accuracy == 1.0);
  CHECK(m.macro.f1 == 1.0);
  CHECK(m.per_class[0].support == 5.0);
  const auto half = report(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 0}));
  const std::vector<MetricsReport> mix{perfect, half};
  CHECK(mean_report(mix).accuracy == 0.75);
}

TEST_CASE("cross validation keeps subjects apart") {
  // 12 subjects with 3 segments each
  const auto data = testing::planted_scalograms(36, 5, {Channel::Fp1}, 1.5, 16, 20, 12);
  std::vector<SubjectLabel> subjects;
  for (int i = 0; i < 12; ++i) subjects.push_back({"p" + std::to_string(i), i % 2 ? Label::Adhd : Label::Control});
  const auto plan = make_folds(subjects, 3, 1);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  const auto cv = cross_validate(data, plan, ModelConfig::with_width_factor(0.125, 16, 20), tc);
  REQUIRE(cv.folds.size() == 3);
  std::set<std::size_t> tested;
  for (const auto& f : cv.folds) {
    std::set<std::string> train(f.train_subjects.begin(), f.train_subjects.end());
    for (const auto& s : f.test_subjects) CHECK(train.count(s) == 0);
    CHECK(f.test_subjects.size() == 4);
    CHECK(f.segment_confusion.total() == 12);
    CHECK(f.subject_confusion.total() == 4);
    tested.insert(f.test_indices.begin(), f.test_indices.end());
  }
  CHECK(tested.size() == 36);

  FoldPlan leaky = make_segment_folds(data, 3, 1);
  leaky.granularity = FoldGranularity::Subject;
  CHECK(error_code_of([&] { cross_validate(data, leaky, ModelConfig::with_width_factor(0.125, 16, 20), tc); }) ==
        Errc::BadConfig);
  const auto j = to_json(cv);
  CHECK(j.at("folds").size() == 3);
  CHECK(j.at("aggregate").contains("subject"));
}
