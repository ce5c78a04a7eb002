#pragma once

#include <filesystem>
#include <string>

#include "dbn/metrics/metrics.hpp"

namespace dbn::metrics {

/// Three decimals, "n/a" for NaN.
std::string fmt3(double v);

/// `class,precision,recall,f1,support,auc` per class, then rows
/// `macro avg`, `weighted avg` and `accuracy`.
std::string report_csv(const Report& report);
/// Fixed-width table in the same layout.
std::string report_text(const Report& report);

/// `fpr,tpr`, one row per curve point, %.6f.
std::string roc_csv(const RocCurve& curve);
/// Unit-square line plot with one polyline per defined curve and a legend
/// carrying each class's AUC.
std::string roc_svg(const Report& report);

/// Header `true\pred,<names>`, one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm);
/// Heatmap; cell opacity is count / max count.
std::string confusion_svg(const ConfusionMatrix& cm);

/// Writes `text` to `path` byte for byte. Throws DataError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dbn::metrics
