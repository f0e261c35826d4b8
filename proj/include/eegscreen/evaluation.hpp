#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegscreen/classifier.hpp"
#include "eegscreen/manifest.hpp"

namespace eegscreen {

// Subject folding keeps every segment of a child in one fold. Segment folding
// is the literal reading where windows of one recording can straddle folds.
enum class FoldGranularity { Subject, Segment };

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  FoldGranularity granularity = FoldGranularity::Subject;
  std::map<std::string, std::size_t> assignments;  // fold key -> fold index

  std::vector<std::size_t> fold_sizes() const;
};

struct SubjectLabel {
  std::string subject_id;
  Label label = Label::Control;
};

// Stratified by label: each class is shuffled with the seed and dealt
// round-robin, continuing where the previous class stopped.
// Throws Error(TooFewSubjects) when a class has fewer than k subjects.
FoldPlan make_folds(std::vector<SubjectLabel> subjects, std::size_t k, std::uint64_t seed);
FoldPlan make_folds(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed);

// Same dealing over individual segments.
FoldPlan make_segment_folds(const std::vector<Scalogram>& dataset, std::size_t k, std::uint64_t seed);

std::string fold_key(const Scalogram& s, FoldGranularity granularity);

nlohmann::json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const nlohmann::json& j);

struct ConfusionMatrix {
  std::size_t tn = 0, fp = 0, fn = 0, tp = 0;

  std::size_t total() const { return tn + fp + fn + tp; }
};

// Throws Error(LengthMismatch) for unequal or empty inputs, Error(BadLabel)
// for values other than 0/1.
ConfusionMatrix confusion(std::span<const int> labels, std::span<const int> preds);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double support = 0.0;
};

struct MetricsReport {
  std::array<ClassMetrics, 2> per_class;
  double accuracy = 0.0;
  ClassMetrics macro;
  ClassMetrics weighted;
  // Metrics whose denominator was zero and were reported as 0.
  std::vector<std::string> flags;
};

double f1_score(double precision, double recall);
ClassMetrics macro_average(std::span<const ClassMetrics> classes);
ClassMetrics weighted_average(std::span<const ClassMetrics> classes);

MetricsReport report(const ConfusionMatrix& cm);

// Field-wise mean over folds; supports are summed.
MetricsReport mean_report(std::span<const MetricsReport> reports);

nlohmann::json to_json(const MetricsReport& r);
nlohmann::json to_json(const ConfusionMatrix& cm);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

// Aligned text table: Precision / Recall / F1-Score columns; class, accuracy,
// macro and weighted rows.
std::string format_table(const MetricsReport& r);

// Majority of 0/1 votes; a tie goes to 0.
int majority_vote(std::span<const int> votes);

struct FoldOutcome {
  std::size_t fold = 0;
  std::vector<std::string> train_subjects;
  std::vector<std::string> test_subjects;
  std::vector<std::size_t> test_indices;  // into the dataset
  ConfusionMatrix segment_confusion;
  ConfusionMatrix subject_confusion;
  MetricsReport segment_report;
  MetricsReport subject_report;
  std::vector<EpochLog> log;
  std::shared_ptr<ResNet> model;
};

struct CvResult {
  std::vector<FoldOutcome> folds;
  MetricsReport segment_aggregate;
  MetricsReport subject_aggregate;
};

// Trains one model per fold on the out-of-fold segments and tests on the
// in-fold ones. Fold f's model and shuffling seeds derive from
// train_cfg.seed and f. Throws Error(SubjectLeakage) if a subject would
// appear on both sides of a subject-grouped split.
CvResult cross_validate(const std::vector<Scalogram>& dataset, const FoldPlan& plan, const ModelConfig& model_cfg,
                        const TrainConfig& train_cfg);

nlohmann::json to_json(const CvResult& result);

}  // namespace eegscreen
