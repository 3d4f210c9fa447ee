#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rppg/io.hpp"
#include "rppg/methods.hpp"
#include "rppg/scenario.hpp"
#include "rppg/spectral.hpp"

namespace rppg {

struct EvalPair {
  std::string recording_id;
  std::string participant_id;
  std::optional<ScenarioLabel> scenario;
  double hr_gt_bpm = 0.0;
  double hr_est_bpm = 0.0;

  double abs_error() const;
};

/// (1/T) sum |HR_GT - HR_EST|. Throws on an empty list.
double mae(std::span<const EvalPair> pairs);

/// Sample standard deviation of the absolute errors over sqrt(n). Needs n >= 2.
double standard_error(std::span<const EvalPair> pairs);

/// Baseline that ignores its input and emits the training-set mean HR.
class ConstantPredictor {
 public:
  explicit ConstantPredictor(double value) : value_(value) {}
  double predict() const { return value_; }
  double operator()(const EvalPair&) const { return value_; }

 private:
  double value_;
};

ConstantPredictor dummy_mean_estimator(std::span<const double> train_hrs);

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignments;  // participant -> fold in [0, k)

  int fold_of(const std::string& participant) const;
  /// Participants per fold, each list sorted.
  std::vector<std::vector<std::string>> folds() const;
};

/// Seeded shuffle of the distinct participant ids (sorted first), then
/// round-robin assignment. Throws when k exceeds the participant count.
FoldPlan kfold_participant_split(std::vector<std::string> participant_ids, int k, std::uint64_t seed);

struct ErrorStat {
  double mae = 0.0;
  std::optional<double> se;  // absent when n < 2
  std::size_t n = 0;
};

/// MAE / SE / n of a non-empty pair list.
ErrorStat error_stat(std::span<const EvalPair> pairs);

struct Diagnostic {
  std::string recording_id;
  std::string message;
  bool excluded = true;
};

struct FoldStat {
  int fold = 0;
  std::optional<ErrorStat> stat;  // absent when the fold has no scored recordings
};

struct EvalReport {
  std::string method;  // GREEN / CHROM / POS / ICA / DUMMY
  std::string config_fingerprint;
  std::vector<EvalPair> per_recording;  // ordered by recording_id
  /// Present scenarios in report column order.
  std::vector<std::pair<ScenarioLabel, ErrorStat>> per_scenario;
  std::optional<ErrorStat> overall;
  std::vector<FoldStat> folds;
  std::optional<double> fold_mean_mae;  // mean of per-fold MAEs
  std::vector<Diagnostic> diagnostics;
  std::size_t excluded = 0;
};

struct EvalConfig {
  MethodConfig method;
  HrPipelineConfig hr;
  int jobs = 1;

  void validate() const;
};

inline constexpr double kMinRecordingS = 10.0;

/// Stable hex digest of every parameter that affects an estimate.
std::string config_fingerprint(const EvalConfig& config, std::string_view method, const FoldPlan* folds);

/// Runs every listed method on each recording (trace and ground truth are read
/// once per recording). Recording failures become diagnostics and are excluded
/// from the aggregates. With `include_dummy`, a mean-HR baseline report is
/// appended: per fold trained on the other folds when a plan is given,
/// otherwise on all scored recordings.
std::vector<EvalReport> evaluate_methods(const DatasetManifest& manifest, const fs::path& base_dir,
                                         std::span<const MethodId> methods, const EvalConfig& config,
                                         const FoldPlan* fold_plan = nullptr, bool include_dummy = false);

EvalReport evaluate_method(const DatasetManifest& manifest, const fs::path& base_dir, MethodId method,
                           const EvalConfig& config, const FoldPlan* fold_plan = nullptr);

/// Fills the aggregates of a report from its per_recording list.
void aggregate(EvalReport& report, const FoldPlan* fold_plan);

std::string report_to_json(const EvalReport& report);
/// One row per report; columns LowHR-Bright, LowHR-Dark, HighHR-Bright,
/// HighHR-Dark (only when `with_scenarios`), ALL. Cells are MAE, or SE when `se`.
std::string summary_csv(std::span<const EvalReport> reports, bool with_scenarios, bool se = false);
std::string recordings_csv(const EvalReport& report);

}  // namespace rppg
