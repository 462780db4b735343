#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hfclass/nn/tensor.hpp"
#include "hfclass/rng.hpp"

namespace hfc::nn {

enum class Mode { train, infer };

enum class LayerKind : std::uint8_t {
  conv1d,
  maxpool1d,
  dense,
  relu,
  softmax,
  batchnorm,
  dropout,
  global_avg_pool,
  residual_stack,
  flatten,
};

std::string_view kind_name(LayerKind kind);
std::optional<LayerKind> kind_from_name(std::string_view name);

/// Construction parameters of one layer. Unused fields stay at their
/// defaults; input sizes are inferred when a model is assembled.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int filters = 0;  // conv1d output channels
  int kernel = 3;
  int stride = 1;
  int pool = 2;     // maxpool window and stride
  int units = 0;    // dense outputs
  double rate = 0;  // dropout probability
  int n = 0;        // residual stack filters

  static LayerSpec conv(int filters, int kernel = 3, int stride = 1);
  static LayerSpec maxpool(int pool = 2);
  static LayerSpec dense(int units);
  static LayerSpec dropout(double rate);
  static LayerSpec residual(int n);
  static LayerSpec of(LayerKind kind);

  bool operator==(const LayerSpec&) const = default;
};

std::string describe(const LayerSpec& spec);

template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  Tensor<Scalar> grad;

  Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(shape) {}
};

/// A differentiable stage. `forward` caches what `backward` needs; `backward`
/// overwrites parameter gradients and returns the input gradient. Shapes
/// exclude the leading batch dimension.
template <typename Scalar>
class Layer {
 public:
  using TensorT = Tensor<Scalar>;

  Layer(LayerSpec spec, Shape input_shape) : spec_(spec), input_shape_(std::move(input_shape)) {}
  virtual ~Layer() = default;
  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  virtual TensorT forward(const TensorT& x, Mode mode) = 0;
  virtual TensorT backward(const TensorT& dy) = 0;

  virtual std::vector<Parameter<Scalar>*> parameters() { return {}; }
  /// Non-trainable state saved with the model (batchnorm running statistics).
  virtual std::vector<TensorT*> buffers() { return {}; }
  /// Convolution and dense layers contained in this layer.
  virtual int weighted_layers() const { return 0; }

  const LayerSpec& spec() const { return spec_; }
  LayerKind kind() const { return spec_.kind; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  Index parameter_count();

 protected:
  /// Checks (batch, input_shape...) and returns the batch size.
  Index check_input(const TensorT& x) const;
  void check_forwarded(bool cached) const;
  Shape batched(Index batch, const Shape& shape) const;

  LayerSpec spec_;
  Shape input_shape_;
  Shape output_shape_;
};

template <typename Scalar>
class Conv1d final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  using ColMatrix = typename TensorT::ColMatrix;

  Conv1d(const LayerSpec& spec, const Shape& input_shape, Rng& init);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;
  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  int weighted_layers() const override { return 1; }

  Parameter<Scalar>& weight() { return weight_; }  // (filters, in_channels, kernel)
  Parameter<Scalar>& bias() { return bias_; }

 private:
  void im2col(const Scalar* x, ColMatrix& cols) const;

  Index in_channels_, in_length_, out_length_, pad_;
  Parameter<Scalar> weight_, bias_;
  TensorT input_;
  bool cached_ = false;
  ColMatrix cols_, dcols_;
};

template <typename Scalar>
class MaxPool1d final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  MaxPool1d(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

 private:
  std::vector<Index> argmax_;
  Index batch_ = -1;
};

template <typename Scalar>
class Dense final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  Dense(const LayerSpec& spec, const Shape& input_shape, Rng& init);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;
  std::vector<Parameter<Scalar>*> parameters() override { return {&weight_, &bias_}; }
  int weighted_layers() const override { return 1; }

  Parameter<Scalar>& weight() { return weight_; }  // (units, in_features)
  Parameter<Scalar>& bias() { return bias_; }

 private:
  Parameter<Scalar> weight_, bias_;
  TensorT input_;
  bool cached_ = false;
};

template <typename Scalar>
class Relu final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  Relu(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

 private:
  TensorT output_;
  bool cached_ = false;
};

/// Row-wise softmax over (batch, classes).
template <typename Scalar>
class Softmax final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  Softmax(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

 private:
  TensorT output_;
  bool cached_ = false;
};

/// Per-channel normalization over (batch, length) for rank-3 input or per
/// feature over the batch for rank-2 input.
template <typename Scalar>
class BatchNorm final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  using Vector = typename TensorT::Vector;

  static constexpr double kEpsilon = 1e-5;
  static constexpr double kMomentum = 0.1;

  BatchNorm(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;
  std::vector<Parameter<Scalar>*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<TensorT*> buffers() override { return {&running_mean_, &running_var_}; }

  TensorT& running_mean() { return running_mean_; }
  TensorT& running_var() { return running_var_; }

 private:
  Index channels_, length_;
  Parameter<Scalar> gamma_, beta_;
  TensorT running_mean_, running_var_;
  TensorT xhat_;
  Vector inv_std_;
  Mode cached_mode_ = Mode::infer;
  bool cached_ = false;
};

/// Inverted dropout: kept activations are scaled by 1 / (1 - rate) in train
/// mode; infer mode is the identity.
template <typename Scalar>
class Dropout final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  Dropout(const LayerSpec& spec, const Shape& input_shape, std::uint64_t seed);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

  /// Reuse the current mask on later forward passes (gradient checks).
  void freeze_mask(bool frozen) { frozen_ = frozen; }

 private:
  Rng rng_;
  TensorT mask_;
  bool frozen_ = false;
  bool cached_ = false;
};

template <typename Scalar>
class GlobalAvgPool final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  GlobalAvgPool(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

 private:
  Index batch_ = -1;
};

template <typename Scalar>
class Flatten final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  Flatten(const LayerSpec& spec, const Shape& input_shape);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;

 private:
  Index batch_ = -1;
};

/// conv(N, 1) -> two units of [conv(N, 3), ReLU, conv(N, 3), + skip, ReLU]
/// -> maxpool(2).
template <typename Scalar>
class ResidualStack final : public Layer<Scalar> {
 public:
  using TensorT = Tensor<Scalar>;
  static constexpr int kUnits = 2;

  ResidualStack(const LayerSpec& spec, const Shape& input_shape, Rng& init);
  TensorT forward(const TensorT& x, Mode mode) override;
  TensorT backward(const TensorT& dy) override;
  std::vector<Parameter<Scalar>*> parameters() override;
  int weighted_layers() const override { return 1 + 2 * kUnits; }

 private:
  std::unique_ptr<Conv1d<Scalar>> entry_;
  std::vector<std::unique_ptr<Conv1d<Scalar>>> convs_;  // two per unit
  std::vector<std::unique_ptr<Relu<Scalar>>> relus_;    // two per unit
  std::unique_ptr<MaxPool1d<Scalar>> pool_;
};

/// Builds the layer for `spec` given the per-sample input shape. Weights are
/// drawn from `init` (He uniform); dropout masks use `seed`.
template <typename Scalar>
std::unique_ptr<Layer<Scalar>> make_layer(const LayerSpec& spec, const Shape& input_shape, Rng& init,
                                          std::uint64_t seed);

}  // namespace hfc::nn
