#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dbn/error.hpp"
#include "dbn/metrics/metrics.hpp"

namespace dbn::metrics {

double RocCurve::tpr(std::size_t i) const { return static_cast<double>(tp[i]) / static_cast<double>(positives); }
double RocCurve::fpr(std::size_t i) const { return static_cast<double>(fp[i]) / static_cast<double>(negatives); }

RocCurve roc_curve(std::span<const double> scores, std::span<const std::size_t> y_true, std::size_t j) {
  if (scores.size() != y_true.size()) throw ConfigError("roc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores[i])) throw ConfigError("roc: non-finite score at sample " + std::to_string(i));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve c;
  for (auto y : y_true) (y == j ? c.positives : c.negatives) += 1;
  if (c.positives == 0 || c.negatives == 0)
    throw ConfigError("roc: class " + std::to_string(j) + " has no " + (c.positives ? "negatives" : "positives"));

  c.thresholds.push_back(std::numeric_limits<double>::infinity());
  c.tp.push_back(0);
  c.fp.push_back(0);
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) (y_true[order[k]] == j ? tp : fp) += 1;
    c.thresholds.push_back(s);
    c.tp.push_back(tp);
    c.fp.push_back(fp);
  }
  return c;
}

double auc(const RocCurve& c) {
  if (c.size() < 2 || c.positives == 0 || c.negatives == 0) throw ConfigError("auc: degenerate curve");
  // Twice the area in units of one (positive, negative) cell; exact in
  // integers, so a single rounding happens in the final division.
  std::uint64_t twice = 0;
  for (std::size_t i = 1; i < c.size(); ++i) twice += (c.fp[i] - c.fp[i - 1]) * (c.tp[i] + c.tp[i - 1]);
  return static_cast<double>(twice) / (2.0 * static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

double trapezoid_auc(std::span<const double> fpr, std::span<const double> tpr) {
  if (fpr.size() != tpr.size() || fpr.size() < 2) throw ConfigError("auc: need at least two matching points");
  double area = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i) {
    if (fpr[i] < fpr[i - 1]) throw ConfigError("auc: fpr not sorted");
    area += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) / 2.0;
  }
  return area;
}

double macro_auc(std::span<const RocCurve> curves) {
  if (curves.empty()) throw ConfigError("macro auc of zero curves");
  double s = 0.0;
  for (const auto& c : curves) s += auc(c);
  return s / static_cast<double>(curves.size());
}

}  // namespace dbn::metrics
