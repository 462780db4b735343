#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hfclass/nn/layers.hpp"

namespace hfc::nn {

enum class Arch : std::uint8_t { classical_cnn, all_conv, deep_cnn, residual, custom };

std::string_view arch_name(Arch arch);
std::optional<Arch> arch_from_name(std::string_view name);
/// "classical_cnn, all_conv, deep_cnn, residual".
std::string arch_names();

inline constexpr int kClasses = 18;
inline const Shape kIqInputShape{2, 2048};

struct ArchOptions {
  int dense_units = 430;  // classical_cnn hidden dense width
  double conv_dropout = 0.1;
  double dense_dropout = 0.5;
  int classes = kClasses;
};

/// Layer table for one of the four architectures, ending in dense(classes)
/// and softmax.
std::vector<LayerSpec> architecture_specs(Arch arch, const ArchOptions& options = {});

/// Sequential network assembled from a layer table. The last layer is
/// expected to be softmax so `forward` returns class probabilities.
template <typename Scalar>
class Model {
 public:
  using TensorT = Tensor<Scalar>;

  Model(std::vector<LayerSpec> specs, Shape sample_shape = kIqInputShape, std::uint64_t seed = 0,
        Arch arch = Arch::custom);

  /// Input (batch, sample_shape...). Returns the last layer's output.
  TensorT forward(const TensorT& x, Mode mode);
  /// Back-propagates a gradient of the last layer's output.
  TensorT backward(const TensorT& dy);
  /// Back-propagates a gradient of the pre-softmax logits, skipping the final
  /// softmax layer.
  TensorT backward_logits(const TensorT& dlogits);

  std::vector<Parameter<Scalar>*> parameters();
  std::vector<TensorT*> buffers();
  void zero_grad();

  Index parameter_count();
  int weighted_layer_count() const;
  int classes() const;

  Arch arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  const Shape& sample_shape() const { return sample_shape_; }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<Scalar>& layer(std::size_t i) { return *layers_.at(i); }

  /// Freezes (or releases) every dropout mask.
  void freeze_dropout(bool frozen);

 private:
  Arch arch_;
  std::uint64_t seed_;
  std::vector<LayerSpec> specs_;
  Shape sample_shape_;
  std::vector<std::unique_ptr<Layer<Scalar>>> layers_;
};

template <typename Scalar>
Model<Scalar> build_model(Arch arch, std::uint64_t seed = 0, const ArchOptions& options = {});

/// Desk-scale classical CNN, about 150k parameters: same six conv blocks with
/// a 65-tap first kernel, a 32-unit hidden dense layer, and dropout only in
/// front of the dense head.
template <typename Scalar>
Model<Scalar> build_reduced_classical(std::uint64_t seed = 0, int classes = kClasses);

/// Index of the largest entry of each row; ties resolve to the lowest index.
template <typename Scalar>
std::vector<int> argmax_rows(const Tensor<Scalar>& probabilities);

}  // namespace hfc::nn
