#include "hfclass/nn/model.hpp"

#include <array>
#include <stdexcept>

namespace hfc::nn {

namespace {

constexpr std::array<std::string_view, 5> kArchNames{"classical_cnn", "all_conv", "deep_cnn", "residual", "custom"};

// all_conv: stride-1/stride-2 pairs, a final stride-2 conv, then a 1x1 head.
constexpr std::array<int, 11> kAllConvWidths{32, 32, 64, 64, 96, 128, 192, 224, 256, 320, 384};
constexpr std::array<int, 11> kAllConvStrides{1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 2};
constexpr int kAllConvHead = 448;

// deep_cnn: pool after every second conv.
constexpr std::array<int, 16> kDeepWidths{16, 16, 32, 32, 64, 64, 96, 96, 128, 128, 192, 192, 256, 288, 352, 352};

constexpr std::array<int, 8> kResidualN{16, 32, 48, 64, 96, 128, 176, 208};

constexpr std::array<int, 6> kClassicalWidths{16, 32, 48, 64, 80, 96};

void conv_block(std::vector<LayerSpec>& s, int filters, int kernel = 3, int stride = 1) {
  s.push_back(LayerSpec::conv(filters, kernel, stride));
  s.push_back(LayerSpec::of(LayerKind::batchnorm));
  s.push_back(LayerSpec::of(LayerKind::relu));
}

void head(std::vector<LayerSpec>& s, const ArchOptions& o) {
  s.push_back(LayerSpec::dropout(o.dense_dropout));
  s.push_back(LayerSpec::dense(o.classes));
  s.push_back(LayerSpec::of(LayerKind::softmax));
}

}  // namespace

std::string_view arch_name(Arch arch) { return kArchNames.at(static_cast<std::size_t>(arch)); }

std::optional<Arch> arch_from_name(std::string_view name) {
  for (std::size_t i = 0; i + 1 < kArchNames.size(); ++i) {
    if (kArchNames[i] == name) return static_cast<Arch>(i);
  }
  return std::nullopt;
}

std::string arch_names() { return "classical_cnn, all_conv, deep_cnn, residual"; }

std::vector<LayerSpec> architecture_specs(Arch arch, const ArchOptions& o) {
  std::vector<LayerSpec> s;
  switch (arch) {
    case Arch::classical_cnn:
      for (int w : kClassicalWidths) {
        conv_block(s, w);
        s.push_back(LayerSpec::maxpool(2));
        s.push_back(LayerSpec::dropout(o.conv_dropout));
      }
      s.push_back(LayerSpec::of(LayerKind::flatten));
      s.push_back(LayerSpec::dropout(o.dense_dropout));
      s.push_back(LayerSpec::dense(o.dense_units));
      s.push_back(LayerSpec::of(LayerKind::relu));
      head(s, o);
      break;
    case Arch::all_conv:
      for (std::size_t i = 0; i < kAllConvWidths.size(); ++i) {
        conv_block(s, kAllConvWidths[i], 3, kAllConvStrides[i]);
        if (kAllConvStrides[i] == 2) s.push_back(LayerSpec::dropout(o.conv_dropout));
      }
      conv_block(s, kAllConvHead, 1);
      s.push_back(LayerSpec::of(LayerKind::global_avg_pool));
      head(s, o);
      break;
    case Arch::deep_cnn:
      for (std::size_t i = 0; i < kDeepWidths.size(); ++i) {
        conv_block(s, kDeepWidths[i]);
        if (i % 2 == 1) {
          s.push_back(LayerSpec::maxpool(2));
          s.push_back(LayerSpec::dropout(o.conv_dropout));
        }
      }
      s.push_back(LayerSpec::of(LayerKind::flatten));
      head(s, o);
      break;
    case Arch::residual:
      for (int n : kResidualN) {
        s.push_back(LayerSpec::residual(n));
        s.push_back(LayerSpec::dropout(o.conv_dropout));
      }
      s.push_back(LayerSpec::of(LayerKind::flatten));
      head(s, o);
      break;
    case Arch::custom:
      throw std::invalid_argument("custom architectures have no predefined layer table");
  }
  return s;
}

template <typename Scalar>
Model<Scalar>::Model(std::vector<LayerSpec> specs, Shape sample_shape, std::uint64_t seed, Arch arch)
    : arch_(arch), seed_(seed), specs_(std::move(specs)), sample_shape_(std::move(sample_shape)) {
  if (specs_.empty()) throw std::invalid_argument("model needs at least one layer");
  Rng init(split_seed(seed, 0));
  Shape shape = sample_shape_;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    try {
      layers_.push_back(make_layer<Scalar>(specs_[i], shape, init, split_seed(seed, 1000 + i)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("layer " + std::to_string(i) + " " + describe(specs_[i]) + " on input " +
                                  shape_string(shape) + ": " + e.what());
    }
    shape = layers_.back()->output_shape();
  }
}

template <typename Scalar>
Tensor<Scalar> Model<Scalar>::forward(const TensorT& x, Mode mode) {
  if (!x.all_finite()) throw std::invalid_argument("model input contains non-finite values");
  TensorT h = layers_.front()->forward(x, mode);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

template <typename Scalar>
Tensor<Scalar> Model<Scalar>::backward(const TensorT& dy) {
  TensorT g = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename Scalar>
Tensor<Scalar> Model<Scalar>::backward_logits(const TensorT& dlogits) {
  if (layers_.back()->kind() != LayerKind::softmax) {
    throw std::logic_error("backward_logits needs a model ending in softmax");
  }
  TensorT g = dlogits;
  for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

template <typename Scalar>
std::vector<Parameter<Scalar>*> Model<Scalar>::parameters() {
  std::vector<Parameter<Scalar>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename Scalar>
std::vector<Tensor<Scalar>*> Model<Scalar>::buffers() {
  std::vector<TensorT*> out;
  for (auto& l : layers_) {
    for (auto* b : l->buffers()) out.push_back(b);
  }
  return out;
}

template <typename Scalar>
void Model<Scalar>::zero_grad() {
  for (auto* p : parameters()) p->grad.set_zero();
}

template <typename Scalar>
Index Model<Scalar>::parameter_count() {
  Index n = 0;
  for (auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename Scalar>
int Model<Scalar>::weighted_layer_count() const {
  int n = 0;
  for (const auto& l : layers_) n += l->weighted_layers();
  return n;
}

template <typename Scalar>
int Model<Scalar>::classes() const {
  const Shape& out = layers_.back()->output_shape();
  return out.size() == 1 ? static_cast<int>(out[0]) : 0;
}

template <typename Scalar>
void Model<Scalar>::freeze_dropout(bool frozen) {
  for (auto& l : layers_) {
    if (auto* d = dynamic_cast<Dropout<Scalar>*>(l.get())) d->freeze_mask(frozen);
  }
}

template <typename Scalar>
Model<Scalar> build_model(Arch arch, std::uint64_t seed, const ArchOptions& options) {
  return Model<Scalar>(architecture_specs(arch, options), kIqInputShape, seed, arch);
}

// A 65-tap first conv (about 11 ms, 90 Hz resolution) acts as a filter bank
// in front of the 3-tap stack. Dropout between conv blocks and again after
// the 32-unit bottleneck keeps this size from fitting a few thousand vectors
// at all, so only the dropout ahead of the dense head remains.
template <typename Scalar>
Model<Scalar> build_reduced_classical(std::uint64_t seed, int classes) {
  constexpr int kFirstKernel = 65;
  std::vector<LayerSpec> s;
  for (int w : kClassicalWidths) {
    conv_block(s, w, w == kClassicalWidths.front() ? kFirstKernel : 3);
    s.push_back(LayerSpec::maxpool(2));
  }
  s.push_back(LayerSpec::of(LayerKind::flatten));
  s.push_back(LayerSpec::dropout(0.5));
  s.push_back(LayerSpec::dense(32));
  s.push_back(LayerSpec::of(LayerKind::relu));
  s.push_back(LayerSpec::dense(classes));
  s.push_back(LayerSpec::of(LayerKind::softmax));
  return Model<Scalar>(std::move(s), kIqInputShape, seed, Arch::classical_cnn);
}

template <typename Scalar>
std::vector<int> argmax_rows(const Tensor<Scalar>& probabilities) {
  if (probabilities.rank() != 2) throw std::invalid_argument("argmax_rows expects (batch, classes)");
  const auto m = probabilities.matrix();
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < m.cols(); ++c) {
      if (m(r, c) > m(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

template class Model<float>;
template class Model<double>;
template Model<float> build_model<float>(Arch, std::uint64_t, const ArchOptions&);
template Model<double> build_model<double>(Arch, std::uint64_t, const ArchOptions&);
template Model<float> build_reduced_classical<float>(std::uint64_t, int);
template Model<double> build_reduced_classical<double>(std::uint64_t, int);
template std::vector<int> argmax_rows<float>(const Tensor<float>&);
template std::vector<int> argmax_rows<double>(const Tensor<double>&);

}  // namespace hfc::nn
