#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dbn/fcm.hpp"
#include "dbn/imaging.hpp"
#include "dbn/nnet/train.hpp"

namespace dbn::pipeline {

/// Every knob of a run. Loaded from a flat `key = value` file; `#` starts a
/// comment, blank lines are ignored, unknown keys are errors. Relative paths
/// resolve against the config file's directory.
///
///   dataset_root           raw dataset, root/<class>/*.pgm       data
///   output_dir             all artifacts                         out
///   image_size             network input side                    224
///   crop_threshold         background cutoff for auto-crop       10
///   enhancements           comma list of blur, hist_eq, clahe    blur,clahe
///   blur_size              odd box-blur side                     3
///   clahe_tiles            tiles per axis                        8
///   clahe_clip             clip limit                            2.0
///   augment                on/off                                true
///   augment_rotation, augment_hflip, augment_vflip, augment_flip_probability,
///   augment_zoom, augment_shift, augment_shear,
///   augment_brightness_min, augment_brightness_max
///   fcm_clusters, fcm_m_initial, fcm_m_final, fcm_epsilon,
///   fcm_max_iterations, fcm_tau
///   fcm_mask               write FCM masks and zero pixels       false
///                          outside them in train/evaluate
///   epochs, batch_size, learning_rate, beta1, beta2, adam_epsilon,
///   early_stop_patience, lr_reduce_factor, lr_reduce_patience,
///   freeze_branches_epochs
///   net_width              channels per branch                   12
///   net_kernel                                                   3
///   dropout_rate                                                 0.3
///   train_fraction                                               0.8
///   seed                   global seed                           0
///   synth_per_class        images per class for `synth`          10
///   synth_size             side of generated images              32
struct RunConfig {
  std::filesystem::path dataset_root = "data";
  std::filesystem::path output_dir = "out";
  std::size_t image_size = 224;
  std::uint8_t crop_threshold = 10;
  std::vector<std::string> enhancements = {"blur", "clahe"};
  std::size_t blur_size = 3;
  imaging::ClaheParams clahe;
  bool augment_enabled = true;
  imaging::AugmentParams augment;
  fcm::FcmConfig fcm;
  bool fcm_mask_enabled = false;
  nnet::TrainConfig train;
  std::size_t net_width = 12;
  std::size_t net_kernel = 3;
  double dropout_rate = 0.3;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::size_t synth_per_class = 10;
  std::size_t synth_size = 32;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;
};

/// Parses config text. `base_dir` anchors relative paths; `source` names the
/// input in error messages. Throws ConfigError with the line number.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {},
                       const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

/// Resolved snapshot, one `key = value` per line in documented order;
/// parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);

}  // namespace dbn::pipeline
