#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dbn/metrics/metrics.hpp"
#include "dbn/pipeline/config.hpp"
#include "dbn/pipeline/run_record.hpp"

namespace dbn::pipeline {

/// Artifact layout under output_dir:
///
///   preprocessed/<class>/<name>.pgm, manifest.csv, train.csv, val.csv
///   fcm/labels/..., fcm/masks/... (fcm_mask), fcm/summary.csv
///   model.ckpt, model_layers.csv, history.csv
///   predictions.csv, report.csv, report.txt, roc_<class>.csv, roc.svg,
///   confusion.csv, confusion.svg
///   run_<command>.txt
struct Layout {
  explicit Layout(const RunConfig& config);
  std::filesystem::path out, preprocessed, manifest, train_csv, val_csv, fcm, checkpoint, history;
};

/// Each command writes its outputs, then run_<command>.txt, and returns the
/// record. Progress and per-file problems go to `log`.
RunRecord cmd_synth(const RunConfig& config, std::ostream& log);
RunRecord cmd_preprocess(const RunConfig& config, std::ostream& log);
RunRecord cmd_fcm(const RunConfig& config, std::ostream& log);
RunRecord cmd_train(const RunConfig& config, std::ostream& log);
RunRecord cmd_evaluate(const RunConfig& config, std::ostream& log,
                       const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// Per-class precision/recall/F1 of the published reference run, with
/// their unweighted means.
struct DemoReport {
  std::vector<metrics::ClassMetrics> classes;
  metrics::Averages macro;
};
DemoReport report_demo();
/// Fixed-width rendering of report_demo().
std::string report_demo_text();

/// One preprocessing pass: auto-crop, resize to image_size, then the
/// enhancement list in order.
GrayImage preprocess_image(const GrayImage& image, const RunConfig& config);

}  // namespace dbn::pipeline
