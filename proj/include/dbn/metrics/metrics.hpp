#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbn/matrix.hpp"

namespace dbn::metrics {

/// counts(t, p): samples of true class t predicted as p.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes, std::vector<std::string> class_names = {});

  std::size_t classes() const { return classes_; }
  const std::vector<std::string>& class_names() const { return names_; }
  std::uint64_t operator()(std::size_t t, std::size_t p) const { return counts_[t * classes_ + p]; }
  std::uint64_t& operator()(std::size_t t, std::size_t p) { return counts_[t * classes_ + p]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::string> names_;
  std::vector<std::uint64_t> counts_;
};

/// Throws ConfigError on unequal lengths or a label >= classes. Missing
/// names default to "class_<j>".
ConfusionMatrix confusion_matrix(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                 std::size_t classes, std::vector<std::string> class_names = {});

struct ClassMetrics {
  std::string name;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  std::uint64_t support = 0;  ///< tp + fn
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 2pr / (p + r), or 0 when p + r == 0.
double f1_score(double precision, double recall);

/// Per class j: precision = tp/(tp+fp), recall = tp/(tp+fn); 0/0 gives 0.
std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm);

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Unweighted mean of the per-class values as given (f1 is averaged, not
/// recomputed from the averaged precision and recall).
Averages macro_average(std::span<const ClassMetrics> metrics);
/// Support-weighted mean. Throws ConfigError when all supports are zero.
Averages weighted_average(std::span<const ClassMetrics> metrics);

/// One-vs-rest curve of class j. Point i is the operating point at the
/// i-th threshold of {+inf, distinct scores descending}; a sample counts as
/// positive when score >= threshold, so tied scores enter in one step.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> tp;
  std::vector<std::uint64_t> fp;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;

  std::size_t size() const { return tp.size(); }
  double tpr(std::size_t i) const;
  double fpr(std::size_t i) const;
};

/// Throws ConfigError if scores and labels differ in length, a score is
/// not finite, or class j has no positives or no negatives.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::size_t> y_true, std::size_t j);

/// Trapezoidal area, accumulated on integer counts and divided once:
/// sum of dfp * (tp_i + tp_{i-1}) over 2PN.
double auc(const RocCurve& curve);
/// Trapezoidal area under arbitrary (fpr, tpr) points sorted by fpr.
double trapezoid_auc(std::span<const double> fpr, std::span<const double> tpr);
double macro_auc(std::span<const RocCurve> curves);

/// Row argmax; ties go to the lowest column.
std::vector<std::size_t> argmax_rows(const Matrix& scores);

struct Report {
  std::vector<ClassMetrics> classes;  ///< in class-name order
  std::uint64_t total = 0;
  double accuracy = 0.0;
  Averages macro;
  Averages weighted;
  /// Per-class one-vs-rest curves; empty when built from a matrix alone.
  /// A class without positives or negatives has no curve (has_curve false)
  /// and is left out of macro_auc.
  std::vector<RocCurve> curves;
  std::vector<bool> has_curve;
  std::vector<double> auc;
  double macro_auc = 0.0;
  ConfusionMatrix confusion;
};

/// Metrics, macro/weighted averages and accuracy = trace / total. Throws
/// ConfigError on an empty matrix.
Report aggregate(const std::vector<ClassMetrics>& metrics, const ConfusionMatrix& cm);

/// Full report from n x K probabilities. Rows must sum to 1 within 1e-6.
Report classification_report(std::span<const std::size_t> y_true, const Matrix& scores,
                             std::vector<std::string> class_names);

}  // namespace dbn::metrics
