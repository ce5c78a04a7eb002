#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dbn/image.hpp"
#include "dbn/nnet/network.hpp"

namespace dbn::nnet {

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t early_stop_patience = 5;
  double lr_reduce_factor = 0.5;
  std::size_t lr_reduce_patience = 3;
  std::uint64_t seed = 0;
  /// Leading epochs during which only the dense head is updated.
  std::size_t freeze_branches_epochs = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;  ///< rate used during this epoch
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::size_t stopped_epoch = 0;  ///< last epoch run
  std::size_t best_epoch = 0;     ///< epoch whose weights were restored
  bool early_stopped = false;
};

struct LabeledImages {
  std::vector<GrayImage> images;
  std::vector<std::size_t> labels;
};

/// Produces a training view of an image from a per-sample seed.
using Augmenter = std::function<GrayImage(const GrayImage&, std::uint64_t)>;

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Eval-mode mean cross-entropy and argmax accuracy (ties to the lowest index).
Evaluation evaluate(Network& net, const LabeledImages& data, std::size_t batch_size = 32);

/// Minibatch Adam on softmax cross-entropy.
///
/// Each epoch shuffles the training set with Rng(config.seed); when an
/// augmenter is given, every sample draw also takes a seed from that
/// generator. After each epoch train and val metrics are measured in eval
/// mode on the un-augmented sets. A strict val-loss improvement snapshots
/// the weights and resets both waits; otherwise the lr is multiplied by
/// lr_reduce_factor once the plateau wait reaches lr_reduce_patience, and
/// training stops once it reaches early_stop_patience. The best snapshot is
/// restored at the end.
///
/// Throws NumericError on a non-finite loss.
TrainingHistory train(Network& net, const LabeledImages& train_set, const LabeledImages& val_set,
                      const TrainConfig& config, const Augmenter& augment = {});

/// `epoch,train_loss,train_acc,val_loss,val_acc,lr`; metrics as %.6f, lr as %.6g.
std::string history_csv(const TrainingHistory& history);
void write_history_csv(const std::filesystem::path& path, const TrainingHistory& history);

}  // namespace dbn::nnet
