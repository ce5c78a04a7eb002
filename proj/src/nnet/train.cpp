#include "dbn/nnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "dbn/error.hpp"
#include "dbn/rng.hpp"

namespace dbn::nnet {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("train: Adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("train: adam_epsilon must be > 0");
  if (early_stop_patience == 0 || lr_reduce_patience == 0) throw ConfigError("train: patience must be >= 1");
  if (!(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0))
    throw ConfigError("train: lr_reduce_factor must lie in (0, 1)");
}

namespace {

void check_set(const LabeledImages& set, std::size_t classes, const char* what) {
  if (set.images.empty()) throw ConfigError(std::string("train: empty ") + what + " set");
  if (set.images.size() != set.labels.size())
    throw ConfigError(std::string("train: ") + what + " image/label count mismatch");
  for (auto y : set.labels)
    if (y >= classes) throw ConfigError(std::string("train: ") + what + " label out of range");
}

struct AdamState {
  std::vector<double> m, v;
  std::size_t steps = 0;
};

std::vector<std::vector<double>> snapshot(const std::vector<Param*>& params) {
  std::vector<std::vector<double>> s;
  s.reserve(params.size());
  for (const auto* p : params) s.push_back(p->value);
  return s;
}

}  // namespace

Evaluation evaluate(Network& net, const LabeledImages& data, std::size_t batch_size) {
  const std::size_t K = net.config().classes;
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.images.size(); start += batch_size) {
    const std::size_t end = std::min(data.images.size(), start + batch_size);
    std::vector<const GrayImage*> batch;
    std::vector<std::size_t> labels;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&data.images[i]);
      labels.push_back(data.labels[i]);
    }
    const Tensor4 x = to_input(batch, net.config().input_channels);
    const Tensor4 z = net.logits(x, Mode::eval);
    for (std::size_t n = 0; n < labels.size(); ++n) {
      const double* zi = z.data() + n * K;
      const double mx = *std::max_element(zi, zi + K);
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += std::exp(zi[k] - mx);
      loss += mx + std::log(sum) - zi[labels[n]];
      if (static_cast<std::size_t>(std::max_element(zi, zi + K) - zi) == labels[n]) ++correct;
    }
  }
  const double n = static_cast<double>(data.images.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainingHistory train(Network& net, const LabeledImages& train_set, const LabeledImages& val_set,
                      const TrainConfig& config, const Augmenter& augment) {
  config.validate();
  const std::size_t K = net.config().classes;
  check_set(train_set, K, "training");
  check_set(val_set, K, "validation");

  Rng rng(config.seed);
  net.dropout().reseed(rng.next_u64());

  const std::vector<Param*> all = net.parameters();
  const std::vector<Param*> head = net.head_parameters();
  std::vector<AdamState> state(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    state[i].m.assign(all[i]->value.size(), 0.0);
    state[i].v.assign(all[i]->value.size(), 0.0);
  }

  TrainingHistory history;
  double lr = config.learning_rate;
  double best_loss = std::numeric_limits<double>::infinity();
  auto best = snapshot(all);
  std::size_t wait_lr = 0, wait_stop = 0;

  std::vector<std::size_t> order(train_set.images.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const bool frozen = epoch <= config.freeze_branches_epochs;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<GrayImage> augmented;
      augmented.reserve(end - start);
      std::vector<const GrayImage*> batch;
      std::vector<std::size_t> labels;
      for (std::size_t i = start; i < end; ++i) {
        const GrayImage& img = train_set.images[order[i]];
        if (augment) {
          augmented.push_back(augment(img, rng.next_u64()));
          batch.push_back(&augmented.back());
        } else {
          batch.push_back(&img);
        }
        labels.push_back(train_set.labels[order[i]]);
      }

      net.zero_grad();
      const double loss = net.loss_and_backward(to_input(batch, net.config().input_channels), labels, Mode::train);
      if (!std::isfinite(loss))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                           std::to_string(start));

      for (std::size_t pi = 0; pi < all.size(); ++pi) {
        Param& p = *all[pi];
        if (frozen && std::find(head.begin(), head.end(), &p) == head.end()) continue;
        AdamState& s = state[pi];
        ++s.steps;
        const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(s.steps));
        const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(s.steps));
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          const double g = p.grad[i];
          s.m[i] = config.beta1 * s.m[i] + (1.0 - config.beta1) * g;
          s.v[i] = config.beta2 * s.v[i] + (1.0 - config.beta2) * g * g;
          p.value[i] -= lr * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + config.adam_epsilon);
        }
      }
    }

    const Evaluation tr = evaluate(net, train_set, config.batch_size);
    const Evaluation va = evaluate(net, val_set, config.batch_size);
    if (!std::isfinite(tr.loss) || !std::isfinite(va.loss))
      throw NumericError("train: non-finite epoch loss at epoch " + std::to_string(epoch));
    history.epochs.push_back({epoch, tr.loss, tr.accuracy, va.loss, va.accuracy, lr});
    history.stopped_epoch = epoch;

    if (va.loss < best_loss) {
      best_loss = va.loss;
      best = snapshot(all);
      history.best_epoch = epoch;
      wait_lr = wait_stop = 0;
      continue;
    }
    ++wait_lr;
    ++wait_stop;
    if (wait_stop >= config.early_stop_patience) {
      history.early_stopped = true;
      break;
    }
    if (wait_lr >= config.lr_reduce_patience) {
      lr *= config.lr_reduce_factor;
      wait_lr = 0;
    }
  }

  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = best[i];
  return history;
}

std::string history_csv(const TrainingHistory& history) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
  char line[256];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f,%.6f,%.6g\n", e.epoch, e.train_loss, e.train_acc, e.val_loss,
                  e.val_acc, e.lr);
    out += line;
  }
  return out;
}

void write_history_csv(const std::filesystem::path& path, const TrainingHistory& history) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << history_csv(history);
  if (!f) throw DataError("write failed: " + path.string());
}

}  // namespace dbn::nnet
