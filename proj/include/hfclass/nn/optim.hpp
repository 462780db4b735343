#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfclass/nn/layers.hpp"

namespace hfc::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First and second moment estimates for one parameter tensor.
template <typename Scalar>
struct AdamMoments {
  typename Tensor<Scalar>::Vector m;
  typename Tensor<Scalar>::Vector v;
};

/// Raised when a gradient (or loss) is NaN or infinite.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One bias-corrected Adam update of `theta` at step t >= 1.
template <typename Scalar>
void adam_step(typename Tensor<Scalar>::Vector& theta, const typename Tensor<Scalar>::Vector& grad,
               AdamMoments<Scalar>& state, double lr, double beta1, double beta2, double epsilon, std::int64_t t);

template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<Parameter<Scalar>*> params, AdamConfig config);

  /// Applies one update from the parameters' current gradients. Throws
  /// NonFiniteError naming the parameter if any gradient is not finite.
  void step();

  double lr() const { return config_.lr; }
  void set_lr(double lr);
  std::int64_t step_count() const { return t_; }
  void set_step_count(std::int64_t t) { t_ = t; }
  std::vector<AdamMoments<Scalar>>& moments() { return moments_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Parameter<Scalar>*> params_;
  AdamConfig config_;
  std::vector<AdamMoments<Scalar>> moments_;
  std::int64_t t_ = 0;
};

struct PlateauConfig {
  double factor = 0.5;
  int patience = 3;
  double min_delta = 1e-3;
  double min_lr = 1e-5;

  void validate() const;
};

/// Reduce-on-plateau learning rate schedule over validation loss. An epoch
/// improves when loss < best - min_delta; after `patience` epochs without
/// improvement the rate is multiplied by `factor` (floored at min_lr) and
/// the count restarts.
class PlateauScheduler {
 public:
  PlateauScheduler(PlateauConfig config, double initial_lr);

  /// Records one epoch's validation loss and returns the learning rate for
  /// the next epoch.
  double step(double val_loss);

  double lr() const { return lr_; }
  double best() const { return best_; }
  int num_bad() const { return num_bad_; }
  void restore(double lr, double best, int num_bad);

 private:
  PlateauConfig config_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int num_bad_ = 0;
};

}  // namespace hfc::nn
