#include "dbn/metrics/metrics.hpp"

#include <cmath>

#include "dbn/error.hpp"

namespace dbn::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::string> class_names)
    : classes_(classes), names_(std::move(class_names)), counts_(classes * classes, 0) {
  if (classes == 0) throw ConfigError("confusion matrix: zero classes");
  if (names_.size() > classes) throw ConfigError("confusion matrix: more names than classes");
  for (std::size_t j = names_.size(); j < classes; ++j) names_.push_back("class_" + std::to_string(j));
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < classes_; ++j) s += (*this)(j, j);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                 std::size_t classes, std::vector<std::string> class_names) {
  if (y_true.size() != y_pred.size())
    throw ConfigError("confusion matrix: " + std::to_string(y_true.size()) + " labels vs " +
                      std::to_string(y_pred.size()) + " predictions");
  ConfusionMatrix cm(classes, std::move(class_names));
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] >= classes || y_pred[i] >= classes)
      throw ConfigError("confusion matrix: label out of range at sample " + std::to_string(i));
    ++cm(y_true[i], y_pred[i]);
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm) {
  const std::size_t K = cm.classes();
  std::vector<ClassMetrics> out(K);
  for (std::size_t j = 0; j < K; ++j) {
    ClassMetrics& m = out[j];
    m.name = cm.class_names()[j];
    m.tp = cm(j, j);
    for (std::size_t i = 0; i < K; ++i) {
      if (i == j) continue;
      m.fp += cm(i, j);
      m.fn += cm(j, i);
    }
    m.support = m.tp + m.fn;
    m.precision = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = m.support ? static_cast<double>(m.tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
  }
  return out;
}

Averages macro_average(std::span<const ClassMetrics> metrics) {
  if (metrics.empty()) throw ConfigError("macro average of zero classes");
  Averages a;
  for (const auto& m : metrics) {
    a.precision += m.precision;
    a.recall += m.recall;
    a.f1 += m.f1;
  }
  const double n = static_cast<double>(metrics.size());
  return {a.precision / n, a.recall / n, a.f1 / n};
}

Averages weighted_average(std::span<const ClassMetrics> metrics) {
  Averages a;
  std::uint64_t total = 0;
  for (const auto& m : metrics) {
    const double w = static_cast<double>(m.support);
    a.precision += w * m.precision;
    a.recall += w * m.recall;
    a.f1 += w * m.f1;
    total += m.support;
  }
  if (total == 0) throw ConfigError("weighted average with zero total support");
  const double n = static_cast<double>(total);
  return {a.precision / n, a.recall / n, a.f1 / n};
}

std::vector<std::size_t> argmax_rows(const Matrix& scores) {
  std::vector<std::size_t> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;
    out[r] = best;
  }
  return out;
}

Report aggregate(const std::vector<ClassMetrics>& metrics, const ConfusionMatrix& cm) {
  if (metrics.size() != cm.classes()) throw ConfigError("aggregate: metric/class count mismatch");
  Report r;
  r.total = cm.total();
  if (r.total == 0) throw ConfigError("aggregate: no samples");
  for (std::size_t j = 0; j < metrics.size(); ++j) {
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < cm.classes(); ++p) row += cm(j, p);
    if (metrics[j].support != row) throw ConfigError("aggregate: support of class " + std::to_string(j) +
                                                     " disagrees with the confusion matrix");
  }
  r.classes = metrics;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.total);
  r.macro = macro_average(metrics);
  r.weighted = weighted_average(metrics);
  r.confusion = cm;
  return r;
}

Report classification_report(std::span<const std::size_t> y_true, const Matrix& scores,
                             std::vector<std::string> class_names) {
  const std::size_t K = scores.cols();
  if (scores.rows() != y_true.size())
    throw ConfigError("classification report: " + std::to_string(scores.rows()) + " score rows vs " +
                      std::to_string(y_true.size()) + " labels");
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < K; ++c) s += scores(r, c);
    if (!(std::abs(s - 1.0) <= 1e-6))
      throw ConfigError("classification report: score row " + std::to_string(r) + " sums to " + std::to_string(s));
  }
  const auto y_pred = argmax_rows(scores);
  const ConfusionMatrix cm = confusion_matrix(y_true, y_pred, K, std::move(class_names));
  Report r = aggregate(class_metrics(cm), cm);

  std::vector<double> column(scores.rows());
  std::vector<RocCurve> defined;
  r.curves.resize(K);
  r.has_curve.assign(K, false);
  r.auc.assign(K, std::nan(""));
  for (std::size_t j = 0; j < K; ++j) {
    const std::uint64_t pos = r.classes[j].support;
    if (pos == 0 || pos == r.total) continue;
    for (std::size_t i = 0; i < scores.rows(); ++i) column[i] = scores(i, j);
    r.curves[j] = roc_curve(column, y_true, j);
    r.has_curve[j] = true;
    r.auc[j] = auc(r.curves[j]);
    defined.push_back(r.curves[j]);
  }
  r.macro_auc = defined.empty() ? std::nan("") : macro_auc(defined);
  return r;
}

}  // namespace dbn::metrics
