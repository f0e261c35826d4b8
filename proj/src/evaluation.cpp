#include "eegscreen/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "eegscreen/error.hpp"
#include "eegscreen/rng.hpp"

namespace eegscreen {

namespace {

const char* granularity_name(FoldGranularity g) { return g == FoldGranularity::Subject ? "subject" : "segment"; }

template <typename Item, typename KeyFn>
std::map<std::string, std::size_t> deal(std::vector<Item> items, std::size_t k, std::uint64_t seed, KeyFn key,
                                        const char* what) {
  if (k < 2) throw Error(Errc::BadConfig, "k must be >= 2");
  std::array<std::vector<std::string>, 2> by_class;
  for (const auto& item : items) {
    if (item.label != Label::Control && item.label != Label::Adhd)
      throw Error(Errc::BadLabel, key(item) + " has no label");
    by_class[static_cast<int>(item.label)].push_back(key(item));
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k)
      throw Error(Errc::TooFewSubjects, std::to_string(by_class[c].size()) + " " + what + " with label " +
                                            std::to_string(c) + ", need at least k=" + std::to_string(k));
  }
  std::map<std::string, std::size_t> out;
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    auto& keys = by_class[c];
    std::sort(keys.begin(), keys.end());
    SplitMix64 rng(derive_seed(seed, 0xF01D, static_cast<std::uint64_t>(c)));
    shuffle(keys.begin(), keys.end(), rng);
    for (const auto& id : keys) {
      if (!out.emplace(id, next).second) throw Error(Errc::DuplicateSubject, id);
      next = (next + 1) % k;
    }
  }
  return out;
}

void check_binary(std::span<const int> v) {
  for (int x : v)
    if (x != 0 && x != 1) throw Error(Errc::BadLabel, "expected 0/1, got " + std::to_string(x));
}

double safe_div(double num, double den, bool& undefined) {
  if (den == 0.0) {
    undefined = true;
    return 0.0;
  }
  return num / den;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

nlohmann::json class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

ClassMetrics class_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(),
          j.at("support").get<double>()};
}

}  // namespace

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [key, fold] : assignments) ++sizes.at(fold);
  return sizes;
}

FoldPlan make_folds(std::vector<SubjectLabel> subjects, std::size_t k, std::uint64_t seed) {
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.granularity = FoldGranularity::Subject;
  plan.assignments = deal(std::move(subjects), k, seed, [](const SubjectLabel& s) { return s.subject_id; }, "subjects");
  return plan;
}

FoldPlan make_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed) {
  std::vector<SubjectLabel> subjects;
  for (const auto& e : manifest.entries) subjects.push_back({e.subject_id, e.label});
  return make_folds(std::move(subjects), k, seed);
}

std::string fold_key(const Scalogram& s, FoldGranularity granularity) {
  if (granularity == FoldGranularity::Subject) return s.subject_id;
  return s.subject_id + "#" + std::to_string(s.segment_index);
}

FoldPlan make_segment_folds(const std::vector<Scalogram>& dataset, std::size_t k, std::uint64_t seed) {
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.granularity = FoldGranularity::Segment;
  plan.assignments = deal(dataset, k, seed,
                          [](const Scalogram& s) { return fold_key(s, FoldGranularity::Segment); }, "segments");
  return plan;
}

nlohmann::json to_json(const FoldPlan& plan) {
  nlohmann::json assignments = nlohmann::json::object();
  for (const auto& [key, fold] : plan.assignments) assignments[key] = fold;
  return {{"k", plan.k},
          {"seed", plan.seed},
          {"granularity", granularity_name(plan.granularity)},
          {"assignments", assignments}};
}

FoldPlan fold_plan_from_json(const nlohmann::json& j) {
  FoldPlan plan;
  try {
    plan.k = j.at("k").get<std::size_t>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    const auto g = j.at("granularity").get<std::string>();
    if (g == "subject") plan.granularity = FoldGranularity::Subject;
    else if (g == "segment") plan.granularity = FoldGranularity::Segment;
    else throw Error(Errc::BadFormat, "unknown granularity " + g);
    for (const auto& [key, fold] : j.at("assignments").items()) plan.assignments[key] = fold.get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("bad fold plan: ") + e.what());
  }
  for (const auto& [key, fold] : plan.assignments)
    if (fold >= plan.k) throw Error(Errc::BadFormat, "fold index out of range for " + key);
  return plan;
}

ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds) {
  if (labels.size() != preds.size())
    throw Error(Errc::LengthMismatch, std::to_string(labels.size()) + " labels vs " +
                                          std::to_string(preds.size()) + " predictions");
  if (labels.empty()) throw Error(Errc::LengthMismatch, "no predictions");
  check_binary(labels);
  check_binary(preds);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) (preds[i] == 0 ? cm.tn : cm.fp)++;
    else (preds[i] == 1 ? cm.tp : cm.fn)++;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

ClassMetrics macro_average(std::span<const ClassMetrics> classes) {
  ClassMetrics m;
  for (const auto& c : classes) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
    m.support += c.support;
  }
  const double n = static_cast<double>(classes.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

ClassMetrics weighted_average(std::span<const ClassMetrics> classes) {
  ClassMetrics m;
  for (const auto& c : classes) m.support += c.support;
  if (m.support == 0.0) return m;
  for (const auto& c : classes) {
    const double w = c.support / m.support;
    m.precision += w * c.precision;
    m.recall += w * c.recall;
    m.f1 += w * c.f1;
  }
  return m;
}

MetricsReport report(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(Errc::LengthMismatch, "empty confusion matrix");
  MetricsReport r;
  // Class 0 is "positive" for its own row: its true positives are tn.
  const std::array<std::array<double, 3>, 2> counts = {{
      {static_cast<double>(cm.tn), static_cast<double>(cm.fn), static_cast<double>(cm.fp)},
      {static_cast<double>(cm.tp), static_cast<double>(cm.fp), static_cast<double>(cm.fn)},
  }};
  for (int c = 0; c < 2; ++c) {
    const auto [hit, false_pos, miss] = counts[c];
    bool p_undef = false, r_undef = false;
    auto& m = r.per_class[c];
    m.precision = safe_div(hit, hit + false_pos, p_undef);
    m.recall = safe_div(hit, hit + miss, r_undef);
    m.f1 = f1_score(m.precision, m.recall);
    m.support = hit + miss;
    if (p_undef) r.flags.push_back("precision_" + std::to_string(c) + "_undefined");
    if (r_undef) r.flags.push_back("recall_" + std::to_string(c) + "_undefined");
  }
  r.accuracy = static_cast<double>(cm.tn + cm.tp) / static_cast<double>(cm.total());
  r.macro = macro_average(r.per_class);
  r.weighted = weighted_average(r.per_class);
  return r;
}

MetricsReport mean_report(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(Errc::EmptyDataset, "no reports to average");
  MetricsReport m;
  const double n = static_cast<double>(reports.size());
  auto acc = [n](ClassMetrics& dst, const ClassMetrics& src) {
    dst.precision += src.precision / n;
    dst.recall += src.recall / n;
    dst.f1 += src.f1 / n;
    dst.support += src.support;
  };
  std::set<std::string> flags;
  for (const auto& r : reports) {
    for (int c = 0; c < 2; ++c) acc(m.per_class[c], r.per_class[c]);
    acc(m.macro, r.macro);
    acc(m.weighted, r.weighted);
    m.accuracy += r.accuracy / n;
    flags.insert(r.flags.begin(), r.flags.end());
  }
  m.flags.assign(flags.begin(), flags.end());
  return m;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"class_0", class_json(r.per_class[0])},
          {"class_1", class_json(r.per_class[1])},
          {"accuracy", r.accuracy},
          {"macro_avg", class_json(r.macro)},
          {"weighted_avg", class_json(r.weighted)},
          {"flags", r.flags}};
}

nlohmann::json to_json(const ConfusionMatrix& cm) {
  return {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.per_class[0] = class_from_json(j.at("class_0"));
    r.per_class[1] = class_from_json(j.at("class_1"));
    r.accuracy = j.at("accuracy").get<double>();
    r.macro = class_from_json(j.at("macro_avg"));
    r.weighted = class_from_json(j.at("weighted_avg"));
    r.flags = j.value("flags", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, std::string("bad metrics report: ") + e.what());
  }
  return r;
}

std::string format_table(const MetricsReport& r) {
  char line[128];
  std::ostringstream out;
  auto row = [&](const char* name, const std::string& p, const std::string& rc, const std::string& f) {
    std::snprintf(line, sizeof line, "%-14s %10s %10s %10s\n", name, p.c_str(), rc.c_str(), f.c_str());
    out << line;
  };
  row("", "Precision", "Recall", "F1-Score");
  row("0 (No ADHD)", fmt2(r.per_class[0].precision), fmt2(r.per_class[0].recall), fmt2(r.per_class[0].f1));
  row("1 (ADHD)", fmt2(r.per_class[1].precision), fmt2(r.per_class[1].recall), fmt2(r.per_class[1].f1));
  out << '\n';
  row("Accuracy", "-", "-", fmt2(r.accuracy));
  row("Macro avg", fmt2(r.macro.precision), fmt2(r.macro.recall), fmt2(r.macro.f1));
  row("Weighted avg", fmt2(r.weighted.precision), fmt2(r.weighted.recall), fmt2(r.weighted.f1));
  return out.str();
}

int majority_vote(std::span<const int> votes) {
  std::size_t ones = 0;
  for (int v : votes) ones += v == 1 ? 1 : 0;
  return 2 * ones > votes.size() ? 1 : 0;
}

CvResult cross_validate(const std::vector<Scalogram>& dataset, const FoldPlan& plan, const ModelConfig& model_cfg,
                        const TrainConfig& train_cfg) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no scalograms");
  validate(model_cfg);
  validate(train_cfg);

  std::vector<std::size_t> fold_of(dataset.size());
  std::set<std::string> present;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto key = fold_key(dataset[i], plan.granularity);
    const auto it = plan.assignments.find(key);
    if (it == plan.assignments.end()) throw Error(Errc::BadConfig, key + " is not in the fold plan");
    fold_of[i] = it->second;
    present.insert(key);
  }
  for (const auto& [key, fold] : plan.assignments)
    if (!present.count(key)) throw Error(Errc::EmptyDataset, key + " has no segments");

  CvResult result;
  std::vector<MetricsReport> seg_reports, subj_reports;
  for (std::size_t f = 0; f < plan.k; ++f) {
    FoldOutcome outcome;
    outcome.fold = f;
    std::vector<Scalogram> train_set;
    std::set<std::string> train_subjects, test_subjects;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (fold_of[i] == f) {
        outcome.test_indices.push_back(i);
        test_subjects.insert(dataset[i].subject_id);
      } else {
        train_set.push_back(dataset[i]);
        train_subjects.insert(dataset[i].subject_id);
      }
    }
    if (outcome.test_indices.empty()) throw Error(Errc::EmptyTestSet, "fold " + std::to_string(f) + " is empty");
    if (plan.granularity == FoldGranularity::Subject) {
      for (const auto& s : test_subjects)
        if (train_subjects.count(s)) throw Error(Errc::SubjectLeakage, s + " is in both train and test of fold " +
                                                                           std::to_string(f));
    }
    outcome.train_subjects.assign(train_subjects.begin(), train_subjects.end());
    outcome.test_subjects.assign(test_subjects.begin(), test_subjects.end());

    TrainConfig fold_cfg = train_cfg;
    fold_cfg.seed = derive_seed(train_cfg.seed, 0xC0DE, f);
    outcome.model = std::make_shared<ResNet>(model_cfg, derive_seed(train_cfg.seed, 0x1417, f));
    outcome.log = train(*outcome.model, train_set, fold_cfg).log;

    std::vector<Scalogram> test_set;
    for (std::size_t i : outcome.test_indices) test_set.push_back(dataset[i]);
    const auto preds = predict_labels(*outcome.model, test_set);
    std::vector<int> labels;
    std::map<std::string, std::pair<int, std::vector<int>>> by_subject;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int label = static_cast<int>(test_set[i].label);
      labels.push_back(label);
      auto& entry = by_subject[test_set[i].subject_id];
      entry.first = label;
      entry.second.push_back(preds[i]);
    }
    outcome.segment_confusion = confusion(labels, preds);
    std::vector<int> subj_labels, subj_preds;
    for (const auto& [id, entry] : by_subject) {
      subj_labels.push_back(entry.first);
      subj_preds.push_back(majority_vote(entry.second));
    }
    outcome.subject_confusion = confusion(subj_labels, subj_preds);
    outcome.segment_report = report(outcome.segment_confusion);
    outcome.subject_report = report(outcome.subject_confusion);
    seg_reports.push_back(outcome.segment_report);
    subj_reports.push_back(outcome.subject_report);
    result.folds.push_back(std::move(outcome));
  }
  result.segment_aggregate = mean_report(seg_reports);
  result.subject_aggregate = mean_report(subj_reports);
  return result;
}

nlohmann::json to_json(const CvResult& result) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : result.folds) {
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : f.log) log.push_back({{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"train_acc", e.train_acc}});
    folds.push_back({{"fold", f.fold},
                     {"test_subjects", f.test_subjects},
                     {"n_test_segments", f.test_indices.size()},
                     {"segment_confusion", to_json(f.segment_confusion)},
                     {"subject_confusion", to_json(f.subject_confusion)},
                     {"segment", to_json(f.segment_report)},
                     {"subject", to_json(f.subject_report)},
                     {"train_log", log}});
  }
  return {{"folds", folds},
          {"aggregate", {{"segment", to_json(result.segment_aggregate)}, {"subject", to_json(result.subject_aggregate)}}}};
}

}  // namespace eegscreen
