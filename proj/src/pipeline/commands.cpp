#include "dbn/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "dbn/dataio.hpp"
#include "dbn/error.hpp"
#include "dbn/metrics/export.hpp"
#include "dbn/nnet/checkpoint.hpp"
#include "dbn/rng.hpp"

namespace dbn::pipeline {

namespace fs = std::filesystem;

Layout::Layout(const RunConfig& c)
    : out(c.output_dir),
      preprocessed(out / "preprocessed"),
      manifest(preprocessed / "manifest.csv"),
      train_csv(preprocessed / "train.csv"),
      val_csv(preprocessed / "val.csv"),
      fcm(out / "fcm"),
      checkpoint(out / "model.ckpt"),
      history(out / "history.csv") {}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RunRecord start_record(const char* command, const RunConfig& config) {
  RunRecord r;
  r.command = command;
  r.config_text = to_text(config);
  return r;
}

void finish_record(RunRecord& r, const RunConfig& config) {
  fs::create_directories(config.output_dir);
  r.write_atomic(config.output_dir / ("run_" + r.command + ".txt"));
}

// Loads a split; with `mask_dir`, pixels outside fcm/masks/<path> are zeroed.
nnet::LabeledImages load_split(const dataio::DatasetManifest& m, std::size_t size,
                               const std::optional<fs::path>& mask_dir = std::nullopt) {
  nnet::LabeledImages set;
  for (const auto& e : m.entries) {
    GrayImage img = dataio::load_pgm(m.resolve(e));
    if (img.width() != size || img.height() != size)
      throw DataError(m.resolve(e).string() + ": " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + " but image_size is " + std::to_string(size) +
                      "; rerun preprocess");
    if (mask_dir) {
      const fs::path mp = *mask_dir / e.path;
      if (!fs::exists(mp)) throw DataError(mp.string() + ": missing FCM mask; run fcm with fcm_mask = true");
      const GrayImage mask = dataio::load_pgm(mp);
      if (mask.width() != size || mask.height() != size) throw DataError(mp.string() + ": mask size mismatch");
      for (std::size_t i = 0; i < img.size(); ++i)
        if (mask.pixels()[i] == 0) img.pixels()[i] = 0;
    }
    set.images.push_back(std::move(img));
    set.labels.push_back(e.class_index);
  }
  return set;
}

std::optional<fs::path> mask_dir(const RunConfig& config) {
  if (!config.fcm_mask_enabled) return std::nullopt;
  return Layout(config).fcm / "masks";
}

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Gray level per cluster index, ordered by centroid intensity so the
// brightest cluster is white.
std::vector<std::uint8_t> cluster_levels(const fcm::Centroids& v) {
  const std::size_t c = v.rows();
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v(a, 0) < v(b, 0); });
  std::vector<std::uint8_t> level(c, 0);
  for (std::size_t rank = 0; rank < c; ++rank)
    level[order[rank]] = c > 1 ? static_cast<std::uint8_t>(rank * 255 / (c - 1)) : 0;
  return level;
}

}  // namespace

GrayImage preprocess_image(const GrayImage& image, const RunConfig& config) {
  GrayImage img = imaging::auto_crop_margins(image, config.crop_threshold).first;
  img = imaging::resize_bilinear(img, config.image_size, config.image_size);
  for (const auto& step : config.enhancements) {
    if (step == "blur")
      img = imaging::box_blur(img, config.blur_size, config.blur_size);
    else if (step == "hist_eq")
      img = imaging::equalize_histogram(img);
    else if (step == "clahe")
      img = imaging::clahe(img, config.clahe);
    else
      throw ConfigError("unknown enhancement '" + step + "'");
  }
  return img;
}

RunRecord cmd_synth(const RunConfig& config, std::ostream& log) {
  RunRecord rec = start_record("synth", config);
  Stopwatch sw;
  const auto m = dataio::generate_synthetic_dataset(config.dataset_root, config.synth_per_class, config.synth_size,
                                                    stage_seed(config.seed, "synth"));
  rec.durations.emplace_back("synth", sw.seconds());
  for (const auto& e : m.entries) rec.add_artifact(config.dataset_root, m.resolve(e));
  log << "synth: " << m.entries.size() << " images in " << m.num_classes() << " classes under "
      << config.dataset_root.string() << "\n";
  finish_record(rec, config);
  return rec;
}

RunRecord cmd_preprocess(const RunConfig& config, std::ostream& log) {
  RunRecord rec = start_record("preprocess", config);
  const Layout L(config);
  Stopwatch sw;
  const dataio::DatasetManifest src = dataio::scan_dataset(config.dataset_root);
  if (src.entries.empty()) throw DataError("preprocess: no images under " + config.dataset_root.string());

  fs::remove_all(L.preprocessed);
  dataio::DatasetManifest out{L.preprocessed, src.class_names, {}};
  std::size_t failed = 0;
  for (const auto& e : src.entries) {
    try {
      const GrayImage img = preprocess_image(dataio::load_pgm(src.resolve(e)), config);
      const fs::path dst = L.preprocessed / e.path;
      fs::create_directories(dst.parent_path());
      dataio::save_pgm(img, dst);
      out.entries.push_back(e);
    } catch (const DataError& err) {
      ++failed;
      log << "preprocess: skipped " << src.resolve(e).string() << ": " << err.what() << "\n";
    }
  }
  if (failed * 10 > src.entries.size())
    throw DataError("preprocess: " + std::to_string(failed) + " of " + std::to_string(src.entries.size()) +
                    " images failed (more than 10%)");
  out.validate();
  const auto [train, val] = dataio::split_manifest(out, {config.train_fraction, stage_seed(config.seed, "split")});
  dataio::write_manifest_csv(out, L.manifest);
  dataio::write_manifest_csv(train, L.train_csv);
  dataio::write_manifest_csv(val, L.val_csv);
  rec.durations.emplace_back("preprocess", sw.seconds());

  for (const auto& e : out.entries) rec.add_artifact(config.output_dir, out.resolve(e));
  for (const auto& p : {L.manifest, L.train_csv, L.val_csv}) rec.add_artifact(config.output_dir, p);
  log << "preprocess: " << out.entries.size() << " images (" << failed << " skipped), " << train.entries.size()
      << " train / " << val.entries.size() << " val\n";
  finish_record(rec, config);
  return rec;
}

RunRecord cmd_fcm(const RunConfig& config, std::ostream& log) {
  RunRecord rec = start_record("fcm", config);
  const Layout L(config);
  Stopwatch sw;
  const auto m = dataio::read_manifest_csv(L.manifest);
  fs::remove_all(L.fcm);
  fs::create_directories(L.fcm);

  std::string summary = "path,iterations,final_shift,converged";
  for (std::size_t j = 0; j < config.fcm.clusters; ++j) summary += ",v_" + std::to_string(j);
  summary += "\n";
  std::vector<fs::path> written;
  for (const auto& e : m.entries) {
    fcm::FcmConfig fc = config.fcm;
    fc.seed = stage_seed(config.seed, "fcm:" + e.path);
    fcm::Segmentation seg;
    try {
      seg = fcm::segment(dataio::load_pgm(m.resolve(e)), fc);
    } catch (const Error& err) {
      throw DataError("fcm: " + m.resolve(e).string() + ": " + err.what());
    }
    const auto level = cluster_levels(seg.result.centroids);
    GrayImage shown = seg.labels;
    for (auto& p : shown.pixels()) p = level[p];
    const fs::path lp = L.fcm / "labels" / e.path;
    fs::create_directories(lp.parent_path());
    dataio::save_pgm(shown, lp);
    written.push_back(lp);
    if (config.fcm_mask_enabled) {
      GrayImage mask = fcm::foreground_mask(seg, config.fcm.tau);
      for (auto& p : mask.pixels()) p = p ? 255 : 0;
      const fs::path mp = L.fcm / "masks" / e.path;
      fs::create_directories(mp.parent_path());
      dataio::save_pgm(mask, mp);
      written.push_back(mp);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", seg.result.final_shift);
    summary += dataio::csv_field(e.path) + "," + std::to_string(seg.result.iterations_run) + "," + buf + "," +
               (seg.result.converged ? "true" : "false");
    for (std::size_t j = 0; j < seg.result.centroids.rows(); ++j) summary += "," + f6(seg.result.centroids(j, 0));
    summary += "\n";
  }
  const fs::path sp = L.fcm / "summary.csv";
  metrics::write_text(sp, summary);
  rec.durations.emplace_back("fcm", sw.seconds());
  for (const auto& p : written) rec.add_artifact(config.output_dir, p);
  rec.add_artifact(config.output_dir, sp);
  log << "fcm: segmented " << m.entries.size() << " images into " << config.fcm.clusters << " clusters\n";
  finish_record(rec, config);
  return rec;
}

RunRecord cmd_train(const RunConfig& config, std::ostream& log) {
  RunRecord rec = start_record("train", config);
  const Layout L(config);
  Stopwatch sw;
  const auto names = dataio::read_manifest_csv(L.manifest).class_names;
  const auto train_m = dataio::read_manifest_csv(L.train_csv, names);
  const auto val_m = dataio::read_manifest_csv(L.val_csv, names);
  const auto masks = mask_dir(config);
  const auto train_set = load_split(train_m, config.image_size, masks);
  const auto val_set = load_split(val_m, config.image_size, masks);
  rec.durations.emplace_back("load", sw.seconds());

  nnet::NetConfig nc;
  nc.input_size = config.image_size;
  nc.classes = names.size();
  nc.width = config.net_width;
  nc.kernel = config.net_kernel;
  nc.dropout_rate = config.dropout_rate;
  nc.seed = stage_seed(config.seed, "init");
  nnet::Network net(nc);

  nnet::TrainConfig tc = config.train;
  tc.seed = stage_seed(config.seed, "train");
  nnet::Augmenter aug;
  if (config.augment_enabled) {
    const imaging::AugmentParams p = config.augment;
    aug = [p](const GrayImage& img, std::uint64_t s) { return imaging::augment(img, p, s); };
  }
  Stopwatch tw;
  const auto history = nnet::train(net, train_set, val_set, tc, aug);
  rec.durations.emplace_back("train", tw.seconds());

  fs::create_directories(L.out);
  nnet::save_checkpoint(L.checkpoint, net);
  const fs::path layers = L.out / "model_layers.csv";
  metrics::write_text(layers, nnet::layer_table_csv(net));
  nnet::write_history_csv(L.history, history);
  for (const auto& p : {L.checkpoint, layers, L.history}) rec.add_artifact(config.output_dir, p);

  const auto& best = history.epochs[history.best_epoch - 1];
  log << "train: " << history.epochs.size() << " epochs" << (history.early_stopped ? " (early stop)" : "")
      << ", best epoch " << history.best_epoch << ": train_acc " << f6(best.train_acc) << ", val_acc "
      << f6(best.val_acc) << ", val_loss " << f6(best.val_loss) << "\n";
  finish_record(rec, config);
  return rec;
}

RunRecord cmd_evaluate(const RunConfig& config, std::ostream& log, const std::optional<fs::path>& checkpoint) {
  RunRecord rec = start_record("evaluate", config);
  const Layout L(config);
  Stopwatch sw;
  nnet::Network net = nnet::load_checkpoint(checkpoint.value_or(L.checkpoint));
  const auto names = dataio::read_manifest_csv(L.manifest).class_names;
  if (net.config().classes != names.size())
    throw DataError("evaluate: checkpoint has " + std::to_string(net.config().classes) + " classes, dataset has " +
                    std::to_string(names.size()));
  const auto val_m = dataio::read_manifest_csv(L.val_csv, names);
  const auto val = load_split(val_m, net.config().input_size, mask_dir(config));
  const Matrix probs = nnet::predict(net, val.images);
  const auto report = metrics::classification_report(val.labels, probs, names);
  rec.durations.emplace_back("evaluate", sw.seconds());

  const std::size_t K = names.size();
  std::string pred = "path,true,pred";
  for (std::size_t k = 0; k < K; ++k) pred += ",p_" + std::to_string(k);
  pred += "\n";
  const auto y_pred = metrics::argmax_rows(probs);
  for (std::size_t i = 0; i < val.images.size(); ++i) {
    pred += dataio::csv_field(val_m.entries[i].path) + "," + std::to_string(val.labels[i]) + "," +
            std::to_string(y_pred[i]);
    for (std::size_t k = 0; k < K; ++k) pred += "," + f6(probs(i, k));
    pred += "\n";
  }

  std::vector<std::pair<fs::path, std::string>> files = {
      {L.out / "predictions.csv", pred},
      {L.out / "report.csv", metrics::report_csv(report)},
      {L.out / "report.txt", metrics::report_text(report)},
      {L.out / "roc.svg", metrics::roc_svg(report)},
      {L.out / "confusion.csv", metrics::confusion_csv(report.confusion)},
      {L.out / "confusion.svg", metrics::confusion_svg(report.confusion)},
  };
  for (std::size_t j = 0; j < K; ++j)
    if (report.has_curve[j]) files.emplace_back(L.out / ("roc_" + names[j] + ".csv"), metrics::roc_csv(report.curves[j]));
  for (const auto& [path, text] : files) {
    metrics::write_text(path, text);
    rec.add_artifact(config.output_dir, path);
  }
  log << "evaluate: " << val.images.size() << " images, accuracy " << metrics::fmt3(report.accuracy)
      << ", macro F1 " << metrics::fmt3(report.macro.f1) << ", macro AUC " << metrics::fmt3(report.macro_auc)
      << "\n";
  finish_record(rec, config);
  return rec;
}

DemoReport report_demo() {
  struct Row {
    const char* name;
    double p, r, f1;
  };
  static constexpr Row rows[] = {
      {"Glioma tumor", 0.914, 0.932, 0.923},
      {"Meningioma tumor", 0.819, 0.798, 0.808},
      {"No tumor", 0.946, 0.875, 0.909},
      {"Pituitary tumor", 0.868, 0.945, 0.905},
  };
  DemoReport d;
  for (const auto& row : rows) {
    metrics::ClassMetrics m;
    m.name = row.name;
    m.precision = row.p;
    m.recall = row.r;
    m.f1 = row.f1;
    d.classes.push_back(m);
  }
  d.macro = metrics::macro_average(d.classes);
  return d;
}

std::string report_demo_text() {
  const DemoReport d = report_demo();
  std::string out = "Published per-class results (embedded constants), macro-averaged\n\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %9s %9s %9s\n", "class", "precision", "recall", "f1-score");
  out += buf;
  for (const auto& m : d.classes) {
    std::snprintf(buf, sizeof buf, "%-18s %9s %9s %9s\n", m.name.c_str(), metrics::fmt3(m.precision).c_str(),
                  metrics::fmt3(m.recall).c_str(), metrics::fmt3(m.f1).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "\n%-18s %9s %9s %9s\n", "macro avg", metrics::fmt3(d.macro.precision).c_str(),
                metrics::fmt3(d.macro.recall).c_str(), metrics::fmt3(d.macro.f1).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "%-18s %9.5f %9.5f %9.5f\n", "macro (exact)", d.macro.precision, d.macro.recall,
                d.macro.f1);
  out += buf;
  return out;
}

}  // namespace dbn::pipeline
