#pragma once

// Classification assessment: confusion matrix, class error ratios,
// accuracy/sensitivity/specificity and the ROC curve with its AUC.
//
// Class 1 (solvent) is the positive class. vp counts actual 1 predicted 1,
// vn actual 0 predicted 0, fp actual 0 predicted 1, fn actual 1 predicted 0.
// Swapping the fp/fn labels breaks the e1/e2 and sensitivity/specificity
// arithmetic, so keep this orientation.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cartcredit::eval {

struct ConfusionMatrix {
  std::size_t vp = 0;
  std::size_t vn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return vp + vn + fp + fn; }
  std::size_t positives() const { return vp + fn; }  // actual 1
  std::size_t negatives() const { return vn + fp; }  // actual 0

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct LabelPair {
  int actual = 0;
  int predicted = 0;
};

// Throws Error{EmptyInput} for an empty list and Error{DomainError} for a
// label outside {0, 1}.
ConfusionMatrix confusion(std::span<const LabelPair> pairs);

struct ErrorRates {
  double e1 = 0.0;  // fn / actual-1 count
  double e2 = 0.0;  // fp / actual-0 count
  double e3 = 0.0;  // (fn + fp) / total
};

// Throws Error{DegenerateClass} when either class is absent.
ErrorRates error_rates(const ConfusionMatrix& cm);

struct Metrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;  // vp / (vp + fn)
  double specificity = 0.0;  // vn / (vn + fp)
};

// Throws Error{DegenerateClass} when either class is absent.
Metrics metrics(const ConfusionMatrix& cm);

struct ScoredLabel {
  int actual = 0;
  double score = 0.0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct AucInterval {
  double se = 0.0;
  double low = 0.0;
  double high = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
  AucInterval interval;
};

// One threshold per distinct score, swept from the highest; a row is
// called positive when score >= threshold. Tied scores move along a
// diagonal segment, so the trapezoidal area equals the rank statistic with
// ties counted one half. Throws Error{DegenerateClass} when a class is
// absent and Error{ScoreOutOfRange} for scores outside [0, 1].
RocCurve roc(std::span<const ScoredLabel> scored);

// Hanley-McNeil standard error with n1 positives and n0 negatives;
// ci = auc ± 1.96 se clamped to [0, 1]. Throws Error{DomainError} unless
// 0 < auc < 1 and both counts are positive.
AucInterval auc_se_ci(double auc, std::size_t n1, std::size_t n0);

struct EvaluationReport {
  std::optional<ConfusionMatrix> confusion;
  std::optional<ErrorRates> rates;
  std::optional<Metrics> metrics;
  std::optional<RocCurve> roc;
  std::string score_mode;  // "leaf" or "hard"
};

// Collects every section that can be computed; degenerate sections are left
// empty instead of failing.
EvaluationReport evaluate(std::span<const LabelPair> labels, std::span<const ScoredLabel> scores,
                          std::string score_mode);

// JSON with fields vp, vn, fp, fn, e1, e2, e3, accuracy, sensitivity,
// specificity, auc, auc_se, auc_ci_low, auc_ci_high (null when unavailable).
std::string report_document(const EvaluationReport& report);
// Fixed-width tables for people.
std::string report_table(const EvaluationReport& report);
// `fpr<TAB>tpr` per point.
std::string roc_tsv(const RocCurve& curve);

}  // namespace cartcredit::eval
