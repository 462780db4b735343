#include "hfclass/nn/layers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hfc::nn {

namespace {

constexpr std::array<std::string_view, 10> kKindNames{"conv1d",  "maxpool1d",       "dense",          "relu",
                                                      "softmax", "batchnorm",       "dropout",        "global_avg_pool",
                                                      "residual_stack", "flatten"};

template <typename Scalar>
void he_uniform(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w, Index fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (Index i = 0; i < w.size(); ++i) w[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
}

}  // namespace

std::string_view kind_name(LayerKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<LayerKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<LayerKind>(i);
  }
  return std::nullopt;
}

LayerSpec LayerSpec::conv(int filters, int kernel, int stride) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.filters = filters;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::maxpool(int pool) {
  LayerSpec s;
  s.kind = LayerKind::maxpool1d;
  s.pool = pool;
  return s;
}

LayerSpec LayerSpec::dense(int units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::residual(int n) {
  LayerSpec s;
  s.kind = LayerKind::residual_stack;
  s.n = n;
  return s;
}

LayerSpec LayerSpec::of(LayerKind kind) {
  LayerSpec s;
  s.kind = kind;
  return s;
}

std::string describe(const LayerSpec& s) {
  std::string out(kind_name(s.kind));
  switch (s.kind) {
    case LayerKind::conv1d:
      out += "(" + std::to_string(s.filters) + ", k" + std::to_string(s.kernel) + ", s" + std::to_string(s.stride) + ")";
      break;
    case LayerKind::maxpool1d: out += "(" + std::to_string(s.pool) + ")"; break;
    case LayerKind::dense: out += "(" + std::to_string(s.units) + ")"; break;
    case LayerKind::dropout: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "(%.2f)", s.rate);
      out += buf;
      break;
    }
    case LayerKind::residual_stack: out += "(N=" + std::to_string(s.n) + ")"; break;
    default: break;
  }
  return out;
}

// --- Layer base ----------------------------------------------------------------

template <typename Scalar>
Index Layer<Scalar>::parameter_count() {
  Index n = 0;
  for (auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename Scalar>
Shape Layer<Scalar>::batched(Index batch, const Shape& shape) const {
  Shape s{batch};
  s.insert(s.end(), shape.begin(), shape.end());
  return s;
}

template <typename Scalar>
Index Layer<Scalar>::check_input(const TensorT& x) const {
  const Index batch = x.rank() > 0 ? x.dim(0) : 0;
  const std::string where(kind_name(spec_.kind));
  expect_shape(where.c_str(), batched(batch, input_shape_), x.shape());
  if (batch < 1) throw std::invalid_argument(where + ": empty batch");
  return batch;
}

template <typename Scalar>
void Layer<Scalar>::check_forwarded(bool cached) const {
  if (!cached) throw std::logic_error(std::string(kind_name(spec_.kind)) + ": backward called before forward");
}

// --- Conv1d --------------------------------------------------------------------

template <typename Scalar>
Conv1d<Scalar>::Conv1d(const LayerSpec& spec, const Shape& input_shape, Rng& init)
    : Layer<Scalar>(spec, input_shape),
      in_channels_(input_shape.size() == 2 ? input_shape[0] : 0),
      in_length_(input_shape.size() == 2 ? input_shape[1] : 0),
      out_length_(0),
      pad_(spec.kernel / 2),
      weight_("weight", {spec.filters, in_channels_, spec.kernel}),
      bias_("bias", {spec.filters}) {
  if (input_shape.size() != 2) throw std::invalid_argument("conv1d expects (channels, length) input");
  if (spec.filters < 1 || spec.kernel < 1 || spec.stride < 1) {
    throw std::invalid_argument("conv1d needs positive filters, kernel and stride");
  }
  out_length_ = (in_length_ + 2 * pad_ - spec.kernel) / spec.stride + 1;
  if (out_length_ < 1) throw std::invalid_argument("conv1d input shorter than kernel");
  this->output_shape_ = {spec.filters, out_length_};
  he_uniform<Scalar>(weight_.value.data(), in_channels_ * spec.kernel, init);
}

template <typename Scalar>
void Conv1d<Scalar>::im2col(const Scalar* x, ColMatrix& cols) const {
  const Index k_size = this->spec_.kernel;
  const Index stride = this->spec_.stride;
  cols.resize(out_length_, in_channels_ * k_size);
  for (Index c = 0; c < in_channels_; ++c) {
    const Scalar* xc = x + c * in_length_;
    for (Index k = 0; k < k_size; ++k) {
      Scalar* col = cols.col(c * k_size + k).data();
      const Index shift = k - pad_;
      if (stride == 1) {
        // Column is the input row shifted by `shift`, zero outside the row.
        const Index lo = std::max<Index>(0, -shift);
        const Index hi = std::min<Index>(out_length_, in_length_ - shift);
        std::fill(col, col + lo, Scalar(0));
        if (hi > lo) std::copy(xc + lo + shift, xc + hi + shift, col + lo);
        std::fill(col + std::max(hi, lo), col + out_length_, Scalar(0));
      } else {
        for (Index l = 0; l < out_length_; ++l) {
          const Index src = l * stride + shift;
          col[l] = (src >= 0 && src < in_length_) ? xc[src] : Scalar(0);
        }
      }
    }
  }
}

template <typename Scalar>
Tensor<Scalar> Conv1d<Scalar>::forward(const TensorT& x, Mode) {
  const Index batch = this->check_input(x);
  const Index filters = this->spec_.filters;
  const Index ck = in_channels_ * this->spec_.kernel;
  Eigen::Map<const ColMatrix> w(weight_.value.ptr(), ck, filters);
  const auto b = bias_.value.data().transpose();
  TensorT y({batch, filters, out_length_});
  for (Index n = 0; n < batch; ++n) {
    im2col(x.ptr() + n * in_channels_ * in_length_, cols_);
    Eigen::Map<ColMatrix> yn(y.ptr() + n * filters * out_length_, out_length_, filters);
    yn.noalias() = cols_ * w;
    yn.rowwise() += b;
  }
  input_ = x;
  cached_ = true;
  return y;
}

template <typename Scalar>
Tensor<Scalar> Conv1d<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(cached_);
  const Index batch = input_.dim(0);
  const Index filters = this->spec_.filters;
  const Index k_size = this->spec_.kernel;
  const Index stride = this->spec_.stride;
  const Index ck = in_channels_ * k_size;
  expect_shape("conv1d backward", {batch, filters, out_length_}, dy.shape());
  Eigen::Map<const ColMatrix> w(weight_.value.ptr(), ck, filters);
  Eigen::Map<ColMatrix> dw(weight_.grad.ptr(), ck, filters);
  dw.setZero();
  bias_.grad.set_zero();
  TensorT dx(input_.shape());
  for (Index n = 0; n < batch; ++n) {
    im2col(input_.ptr() + n * in_channels_ * in_length_, cols_);
    Eigen::Map<const ColMatrix> dyn(dy.ptr() + n * filters * out_length_, out_length_, filters);
    dw.noalias() += cols_.transpose() * dyn;
    bias_.grad.data() += dyn.colwise().sum().transpose();
    dcols_.noalias() = dyn * w.transpose();
    Scalar* dxn = dx.ptr() + n * in_channels_ * in_length_;
    for (Index c = 0; c < in_channels_; ++c) {
      Scalar* dxc = dxn + c * in_length_;
      for (Index k = 0; k < k_size; ++k) {
        const Scalar* col = dcols_.col(c * k_size + k).data();
        const Index shift = k - pad_;
        for (Index l = 0; l < out_length_; ++l) {
          const Index dst = l * stride + shift;
          if (dst >= 0 && dst < in_length_) dxc[dst] += col[l];
        }
      }
    }
  }
  return dx;
}

// --- MaxPool1d -----------------------------------------------------------------

template <typename Scalar>
MaxPool1d<Scalar>::MaxPool1d(const LayerSpec& spec, const Shape& input_shape) : Layer<Scalar>(spec, input_shape) {
  if (input_shape.size() != 2) throw std::invalid_argument("maxpool1d expects (channels, length) input");
  if (spec.pool < 1) throw std::invalid_argument("maxpool1d needs a positive pool size");
  if (input_shape[1] / spec.pool < 1) throw std::invalid_argument("maxpool1d input shorter than pool window");
  this->output_shape_ = {input_shape[0], input_shape[1] / spec.pool};
}

template <typename Scalar>
Tensor<Scalar> MaxPool1d<Scalar>::forward(const TensorT& x, Mode) {
  const Index batch = this->check_input(x);
  const Index rows = batch * this->input_shape_[0];
  const Index in_len = this->input_shape_[1];
  const Index out_len = this->output_shape_[1];
  const Index pool = this->spec_.pool;
  TensorT y({batch, this->output_shape_[0], out_len});
  argmax_.resize(static_cast<std::size_t>(y.size()));
  for (Index r = 0; r < rows; ++r) {
    const Scalar* xr = x.ptr() + r * in_len;
    for (Index o = 0; o < out_len; ++o) {
      Index best = o * pool;
      for (Index j = best + 1; j < (o + 1) * pool; ++j) {
        if (xr[j] > xr[best]) best = j;
      }
      y[r * out_len + o] = xr[best];
      argmax_[static_cast<std::size_t>(r * out_len + o)] = r * in_len + best;
    }
  }
  batch_ = batch;
  return y;
}

template <typename Scalar>
Tensor<Scalar> MaxPool1d<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(batch_ > 0);
  expect_shape("maxpool1d backward", this->batched(batch_, this->output_shape_), dy.shape());
  TensorT dx(this->batched(batch_, this->input_shape_));
  for (Index i = 0; i < dy.size(); ++i) dx[argmax_[static_cast<std::size_t>(i)]] += dy[i];
  return dx;
}

// --- Dense ---------------------------------------------------------------------

template <typename Scalar>
Dense<Scalar>::Dense(const LayerSpec& spec, const Shape& input_shape, Rng& init)
    : Layer<Scalar>(spec, input_shape),
      weight_("weight", {spec.units, input_shape.empty() ? 0 : input_shape[0]}),
      bias_("bias", {spec.units}) {
  if (input_shape.size() != 1) throw std::invalid_argument("dense expects (features) input; add a flatten layer");
  if (spec.units < 1) throw std::invalid_argument("dense needs positive units");
  this->output_shape_ = {spec.units};
  he_uniform<Scalar>(weight_.value.data(), input_shape[0], init);
}

template <typename Scalar>
Tensor<Scalar> Dense<Scalar>::forward(const TensorT& x, Mode) {
  using ColMatrix = typename TensorT::ColMatrix;
  const Index batch = this->check_input(x);
  const Index in = this->input_shape_[0];
  const Index units = this->spec_.units;
  Eigen::Map<const ColMatrix> w(weight_.value.ptr(), in, units);
  TensorT y({batch, units});
  y.matrix().noalias() = x.matrix() * w;
  y.matrix().rowwise() += bias_.value.data().transpose();
  input_ = x;
  cached_ = true;
  return y;
}

template <typename Scalar>
Tensor<Scalar> Dense<Scalar>::backward(const TensorT& dy) {
  using ColMatrix = typename TensorT::ColMatrix;
  this->check_forwarded(cached_);
  const Index batch = input_.dim(0);
  const Index in = this->input_shape_[0];
  const Index units = this->spec_.units;
  expect_shape("dense backward", {batch, units}, dy.shape());
  Eigen::Map<const ColMatrix> w(weight_.value.ptr(), in, units);
  Eigen::Map<ColMatrix> dw(weight_.grad.ptr(), in, units);
  dw.noalias() = input_.matrix().transpose() * dy.matrix();
  bias_.grad.data() = dy.matrix().colwise().sum().transpose();
  TensorT dx(input_.shape());
  dx.matrix().noalias() = dy.matrix() * w.transpose();
  return dx;
}

// --- Relu ----------------------------------------------------------------------

template <typename Scalar>
Relu<Scalar>::Relu(const LayerSpec& spec, const Shape& input_shape) : Layer<Scalar>(spec, input_shape) {
  this->output_shape_ = input_shape;
}

template <typename Scalar>
Tensor<Scalar> Relu<Scalar>::forward(const TensorT& x, Mode) {
  this->check_input(x);
  output_ = TensorT(x.shape(), x.data().cwiseMax(Scalar(0)));
  cached_ = true;
  return output_;
}

template <typename Scalar>
Tensor<Scalar> Relu<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(cached_);
  expect_shape("relu backward", output_.shape(), dy.shape());
  return TensorT(dy.shape(), (output_.data().array() > Scalar(0)).select(dy.data().array(), Scalar(0)).matrix());
}

// --- Softmax -------------------------------------------------------------------

template <typename Scalar>
Softmax<Scalar>::Softmax(const LayerSpec& spec, const Shape& input_shape) : Layer<Scalar>(spec, input_shape) {
  if (input_shape.size() != 1) throw std::invalid_argument("softmax expects (classes) input");
  this->output_shape_ = input_shape;
}

template <typename Scalar>
Tensor<Scalar> Softmax<Scalar>::forward(const TensorT& x, Mode) {
  this->check_input(x);
  TensorT y = x;
  auto m = y.matrix();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  output_ = y;
  cached_ = true;
  return y;
}

template <typename Scalar>
Tensor<Scalar> Softmax<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(cached_);
  expect_shape("softmax backward", output_.shape(), dy.shape());
  TensorT dx(dy.shape());
  const auto y = output_.matrix();
  const auto g = dy.matrix();
  auto d = dx.matrix();
  for (Index r = 0; r < y.rows(); ++r) {
    const Scalar dot = y.row(r).dot(g.row(r));
    d.row(r) = y.row(r).array() * (g.row(r).array() - dot);
  }
  return dx;
}

// --- BatchNorm -----------------------------------------------------------------

template <typename Scalar>
BatchNorm<Scalar>::BatchNorm(const LayerSpec& spec, const Shape& input_shape)
    : Layer<Scalar>(spec, input_shape),
      channels_(input_shape.empty() ? 0 : input_shape[0]),
      length_(input_shape.size() == 2 ? input_shape[1] : 1),
      gamma_("gamma", {channels_}),
      beta_("beta", {channels_}),
      running_mean_({channels_}),
      running_var_({channels_}) {
  if (input_shape.empty() || input_shape.size() > 2) {
    throw std::invalid_argument("batchnorm expects (features) or (channels, length) input");
  }
  this->output_shape_ = input_shape;
  gamma_.value.data().setOnes();
  running_var_.data().setOnes();
}

template <typename Scalar>
Tensor<Scalar> BatchNorm<Scalar>::forward(const TensorT& x, Mode mode) {
  const Index batch = this->check_input(x);
  const Index count = batch * length_;
  if (mode == Mode::train && count < 2) throw std::invalid_argument("batchnorm needs at least two values per channel");
  TensorT y(x.shape());
  xhat_ = TensorT(x.shape());
  inv_std_.resize(channels_);
  for (Index c = 0; c < channels_; ++c) {
    double mean, var;
    if (mode == Mode::train) {
      double s = 0.0;
      for (Index b = 0; b < batch; ++b) {
        const Scalar* p = x.ptr() + (b * channels_ + c) * length_;
        for (Index l = 0; l < length_; ++l) s += static_cast<double>(p[l]);
      }
      mean = s / static_cast<double>(count);
      double ss = 0.0;
      for (Index b = 0; b < batch; ++b) {
        const Scalar* p = x.ptr() + (b * channels_ + c) * length_;
        for (Index l = 0; l < length_; ++l) {
          const double d = static_cast<double>(p[l]) - mean;
          ss += d * d;
        }
      }
      var = ss / static_cast<double>(count);
      const double unbiased = ss / static_cast<double>(count - 1);
      running_mean_[c] = static_cast<Scalar>((1.0 - kMomentum) * running_mean_[c] + kMomentum * mean);
      running_var_[c] = static_cast<Scalar>((1.0 - kMomentum) * running_var_[c] + kMomentum * unbiased);
    } else {
      mean = static_cast<double>(running_mean_[c]);
      var = static_cast<double>(running_var_[c]);
    }
    const double inv = 1.0 / std::sqrt(var + kEpsilon);
    inv_std_[c] = static_cast<Scalar>(inv);
    const Scalar g = gamma_.value[c];
    const Scalar bt = beta_.value[c];
    for (Index b = 0; b < batch; ++b) {
      const Index off = (b * channels_ + c) * length_;
      for (Index l = 0; l < length_; ++l) {
        const Scalar h = static_cast<Scalar>((static_cast<double>(x[off + l]) - mean) * inv);
        xhat_[off + l] = h;
        y[off + l] = g * h + bt;
      }
    }
  }
  cached_mode_ = mode;
  cached_ = true;
  return y;
}

template <typename Scalar>
Tensor<Scalar> BatchNorm<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(cached_);
  expect_shape("batchnorm backward", xhat_.shape(), dy.shape());
  const Index batch = xhat_.dim(0);
  const double count = static_cast<double>(batch * length_);
  TensorT dx(dy.shape());
  for (Index c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (Index b = 0; b < batch; ++b) {
      const Index off = (b * channels_ + c) * length_;
      for (Index l = 0; l < length_; ++l) {
        sum_dy += static_cast<double>(dy[off + l]);
        sum_dy_xhat += static_cast<double>(dy[off + l]) * static_cast<double>(xhat_[off + l]);
      }
    }
    gamma_.grad[c] = static_cast<Scalar>(sum_dy_xhat);
    beta_.grad[c] = static_cast<Scalar>(sum_dy);
    const double scale = static_cast<double>(gamma_.value[c]) * static_cast<double>(inv_std_[c]);
    for (Index b = 0; b < batch; ++b) {
      const Index off = (b * channels_ + c) * length_;
      for (Index l = 0; l < length_; ++l) {
        const double g = static_cast<double>(dy[off + l]);
        if (cached_mode_ == Mode::train) {
          const double h = static_cast<double>(xhat_[off + l]);
          dx[off + l] = static_cast<Scalar>(scale * (g - sum_dy / count - h * sum_dy_xhat / count));
        } else {
          dx[off + l] = static_cast<Scalar>(scale * g);
        }
      }
    }
  }
  return dx;
}

// --- Dropout -------------------------------------------------------------------

template <typename Scalar>
Dropout<Scalar>::Dropout(const LayerSpec& spec, const Shape& input_shape, std::uint64_t seed)
    : Layer<Scalar>(spec, input_shape), rng_(seed) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  this->output_shape_ = input_shape;
}

template <typename Scalar>
Tensor<Scalar> Dropout<Scalar>::forward(const TensorT& x, Mode mode) {
  this->check_input(x);
  cached_ = true;
  if (mode == Mode::infer || this->spec_.rate == 0.0) {
    mask_ = TensorT(x.shape(), TensorT::Vector::Ones(x.size()));
    return x;
  }
  if (!(frozen_ && mask_.shape() == x.shape())) {
    const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - this->spec_.rate));
    mask_ = TensorT(x.shape());
    for (Index i = 0; i < mask_.size(); ++i) mask_[i] = rng_.uniform() >= this->spec_.rate ? keep : Scalar(0);
  }
  return TensorT(x.shape(), x.data().cwiseProduct(mask_.data()));
}

template <typename Scalar>
Tensor<Scalar> Dropout<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(cached_);
  expect_shape("dropout backward", mask_.shape(), dy.shape());
  return TensorT(dy.shape(), dy.data().cwiseProduct(mask_.data()));
}

// --- GlobalAvgPool -------------------------------------------------------------

template <typename Scalar>
GlobalAvgPool<Scalar>::GlobalAvgPool(const LayerSpec& spec, const Shape& input_shape)
    : Layer<Scalar>(spec, input_shape) {
  if (input_shape.size() != 2) throw std::invalid_argument("global_avg_pool expects (channels, length) input");
  this->output_shape_ = {input_shape[0]};
}

template <typename Scalar>
Tensor<Scalar> GlobalAvgPool<Scalar>::forward(const TensorT& x, Mode) {
  const Index batch = this->check_input(x);
  const Index len = this->input_shape_[1];
  TensorT y({batch, this->input_shape_[0]});
  Eigen::Map<const typename TensorT::RowMatrix> rows(x.ptr(), y.size(), len);
  y.data() = rows.rowwise().mean();
  batch_ = batch;
  return y;
}

template <typename Scalar>
Tensor<Scalar> GlobalAvgPool<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(batch_ > 0);
  expect_shape("global_avg_pool backward", {batch_, this->input_shape_[0]}, dy.shape());
  const Index len = this->input_shape_[1];
  TensorT dx(this->batched(batch_, this->input_shape_));
  Eigen::Map<typename TensorT::RowMatrix> rows(dx.ptr(), dy.size(), len);
  rows.colwise() = dy.data() / static_cast<Scalar>(len);
  return dx;
}

// --- Flatten -------------------------------------------------------------------

template <typename Scalar>
Flatten<Scalar>::Flatten(const LayerSpec& spec, const Shape& input_shape) : Layer<Scalar>(spec, input_shape) {
  this->output_shape_ = {shape_size(input_shape)};
}

template <typename Scalar>
Tensor<Scalar> Flatten<Scalar>::forward(const TensorT& x, Mode) {
  batch_ = this->check_input(x);
  return x.reshaped(this->batched(batch_, this->output_shape_));
}

template <typename Scalar>
Tensor<Scalar> Flatten<Scalar>::backward(const TensorT& dy) {
  this->check_forwarded(batch_ > 0);
  expect_shape("flatten backward", this->batched(batch_, this->output_shape_), dy.shape());
  return dy.reshaped(this->batched(batch_, this->input_shape_));
}

// --- ResidualStack -------------------------------------------------------------

template <typename Scalar>
ResidualStack<Scalar>::ResidualStack(const LayerSpec& spec, const Shape& input_shape, Rng& init)
    : Layer<Scalar>(spec, input_shape) {
  if (input_shape.size() != 2) throw std::invalid_argument("residual_stack expects (channels, length) input");
  if (spec.n < 1) throw std::invalid_argument("residual_stack needs N >= 1");
  entry_ = std::make_unique<Conv1d<Scalar>>(LayerSpec::conv(spec.n, 1), input_shape, init);
  const Shape inner = entry_->output_shape();
  for (int u = 0; u < 2 * kUnits; ++u) {
    convs_.push_back(std::make_unique<Conv1d<Scalar>>(LayerSpec::conv(spec.n, 3), inner, init));
    relus_.push_back(std::make_unique<Relu<Scalar>>(LayerSpec::of(LayerKind::relu), inner));
  }
  pool_ = std::make_unique<MaxPool1d<Scalar>>(LayerSpec::maxpool(2), inner);
  this->output_shape_ = pool_->output_shape();
}

template <typename Scalar>
Tensor<Scalar> ResidualStack<Scalar>::forward(const TensorT& x, Mode mode) {
  this->check_input(x);
  TensorT h = entry_->forward(x, mode);
  for (int u = 0; u < kUnits; ++u) {
    TensorT a = convs_[2 * u]->forward(h, mode);
    a = relus_[2 * u]->forward(a, mode);
    a = convs_[2 * u + 1]->forward(a, mode);
    a.data() += h.data();
    h = relus_[2 * u + 1]->forward(a, mode);
  }
  return pool_->forward(h, mode);
}

template <typename Scalar>
Tensor<Scalar> ResidualStack<Scalar>::backward(const TensorT& dy) {
  TensorT dh = pool_->backward(dy);
  for (int u = kUnits - 1; u >= 0; --u) {
    TensorT ds = relus_[2 * u + 1]->backward(dh);
    TensorT da = convs_[2 * u + 1]->backward(ds);
    da = relus_[2 * u]->backward(da);
    da = convs_[2 * u]->backward(da);
    ds.data() += da.data();
    dh = std::move(ds);
  }
  return entry_->backward(dh);
}

template <typename Scalar>
std::vector<Parameter<Scalar>*> ResidualStack<Scalar>::parameters() {
  std::vector<Parameter<Scalar>*> out = entry_->parameters();
  for (auto& c : convs_) {
    for (auto* p : c->parameters()) out.push_back(p);
  }
  return out;
}

// --- Factory -------------------------------------------------------------------

template <typename Scalar>
std::unique_ptr<Layer<Scalar>> make_layer(const LayerSpec& spec, const Shape& input_shape, Rng& init,
                                          std::uint64_t seed) {
  switch (spec.kind) {
    case LayerKind::conv1d: return std::make_unique<Conv1d<Scalar>>(spec, input_shape, init);
    case LayerKind::maxpool1d: return std::make_unique<MaxPool1d<Scalar>>(spec, input_shape);
    case LayerKind::dense: return std::make_unique<Dense<Scalar>>(spec, input_shape, init);
    case LayerKind::relu: return std::make_unique<Relu<Scalar>>(spec, input_shape);
    case LayerKind::softmax: return std::make_unique<Softmax<Scalar>>(spec, input_shape);
    case LayerKind::batchnorm: return std::make_unique<BatchNorm<Scalar>>(spec, input_shape);
    case LayerKind::dropout: return std::make_unique<Dropout<Scalar>>(spec, input_shape, seed);
    case LayerKind::global_avg_pool: return std::make_unique<GlobalAvgPool<Scalar>>(spec, input_shape);
    case LayerKind::residual_stack: return std::make_unique<ResidualStack<Scalar>>(spec, input_shape, init);
    case LayerKind::flatten: return std::make_unique<Flatten<Scalar>>(spec, input_shape);
  }
  throw std::invalid_argument("unknown layer kind");
}

#define HFC_INSTANTIATE(S)                                                                              \
  template class Layer<S>;                                                                              \
  template class Conv1d<S>;                                                                             \
  template class MaxPool1d<S>;                                                                          \
  template class Dense<S>;                                                                              \
  template class Relu<S>;                                                                               \
  template class Softmax<S>;                                                                            \
  template class BatchNorm<S>;                                                                          \
  template class Dropout<S>;                                                                            \
  template class GlobalAvgPool<S>;                                                                      \
  template class Flatten<S>;                                                                            \
  template class ResidualStack<S>;                                                                      \
  template std::unique_ptr<Layer<S>> make_layer<S>(const LayerSpec&, const Shape&, Rng&, std::uint64_t);

HFC_INSTANTIATE(float)
HFC_INSTANTIATE(double)

}  // namespace hfc::nn
