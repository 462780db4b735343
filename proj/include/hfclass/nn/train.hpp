#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfclass/dataset.hpp"
#include "hfclass/nn/model.hpp"
#include "hfclass/nn/optim.hpp"

namespace hfc::nn {

struct TrainConfig {
  std::size_t batch_size = 128;
  int epochs = 30;
  AdamConfig adam;
  PlateauConfig plateau;
  std::uint64_t seed = 0;  // epoch shuffles
  std::size_t eval_batch_size = 256;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;  // rate used during the epoch
};

/// Optimizer and scheduler position, saved with checkpoints so training can
/// resume.
struct TrainingState {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 1e-3;
  double plateau_best = std::numeric_limits<double>::infinity();
  int plateau_bad = 0;
};

/// Non-finite loss or gradient during training.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch, std::size_t batch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  int epoch_;
  std::size_t batch_;
};

/// (batch, 2, 2048) tensor with I in channel 0 and Q in channel 1.
template <typename Scalar>
Tensor<Scalar> make_batch(const Dataset& data, std::span<const std::size_t> indices);

/// Mean negative log-likelihood of `labels` under row probabilities.
template <typename Scalar>
double cross_entropy(const Tensor<Scalar>& probabilities, std::span<const int> labels);

/// (p - onehot) / batch: gradient of the mean cross-entropy with respect to
/// the pre-softmax logits.
template <typename Scalar>
Tensor<Scalar> cross_entropy_logit_grad(const Tensor<Scalar>& probabilities, std::span<const int> labels);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> predictions;
};

/// Infer-mode loss, accuracy and predictions over a whole dataset.
template <typename Scalar>
LossAccuracy evaluate_loss(Model<Scalar>& model, const Dataset& data, std::size_t batch_size = 256);

template <typename Scalar>
class Trainer {
 public:
  Trainer(Model<Scalar>& model, TrainConfig config);

  /// Runs epochs state().epoch + 1 .. config.epochs. The callback sees each
  /// epoch's statistics as soon as it completes.
  std::vector<EpochStats> fit(const Dataset& train, const Dataset& validation,
                              const std::function<void(const EpochStats&)>& on_epoch = {});

  TrainingState state() const;
  void restore(const TrainingState& state);
  Adam<Scalar>& optimizer() { return adam_; }

 private:
  Model<Scalar>& model_;
  TrainConfig config_;
  Adam<Scalar> adam_;
  PlateauScheduler scheduler_;
  int epoch_ = 0;
};

/// "epoch,train_loss,train_acc,val_loss,val_acc,lr" followed by one row per
/// epoch.
std::string history_csv(const std::vector<EpochStats>& history);
std::vector<EpochStats> parse_history_csv(const std::string& text);

}  // namespace hfc::nn
