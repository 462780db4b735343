#include "hfclass/nn/optim.hpp"

#include <algorithm>
#include <cmath>

namespace hfc::nn {

void AdamConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
}

void PlateauConfig::validate() const {
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("plateau factor must lie in (0, 1)");
  if (patience < 0) throw std::invalid_argument("plateau patience must be non-negative");
  if (!(min_delta >= 0.0)) throw std::invalid_argument("plateau min_delta must be non-negative");
  if (!(min_lr >= 0.0)) throw std::invalid_argument("plateau min_lr must be non-negative");
}

template <typename Scalar>
void adam_step(typename Tensor<Scalar>::Vector& theta, const typename Tensor<Scalar>::Vector& grad,
               AdamMoments<Scalar>& state, double lr, double beta1, double beta2, double epsilon, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("Adam step counter must start at 1");
  if (theta.size() != grad.size()) throw std::invalid_argument("Adam parameter and gradient sizes differ");
  if (!grad.allFinite()) throw NonFiniteError("non-finite gradient");
  if (state.m.size() != theta.size()) state.m.setZero(theta.size());
  if (state.v.size() != theta.size()) state.v.setZero(theta.size());
  const auto b1 = static_cast<Scalar>(beta1);
  const auto b2 = static_cast<Scalar>(beta2);
  state.m = b1 * state.m + (Scalar(1) - b1) * grad;
  state.v = b2 * state.v + (Scalar(1) - b2) * grad.cwiseAbs2();
  const auto c1 = static_cast<Scalar>(1.0 - std::pow(beta1, static_cast<double>(t)));
  const auto c2 = static_cast<Scalar>(1.0 - std::pow(beta2, static_cast<double>(t)));
  const auto step = static_cast<Scalar>(lr);
  const auto eps = static_cast<Scalar>(epsilon);
  theta.array() -= step * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

template <typename Scalar>
Adam<Scalar>::Adam(std::vector<Parameter<Scalar>*> params, AdamConfig config)
    : params_(std::move(params)), config_(config), moments_(params_.size()) {
  config_.validate();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    moments_[i].m.setZero(params_[i]->value.size());
    moments_[i].v.setZero(params_[i]->value.size());
  }
}

template <typename Scalar>
void Adam<Scalar>::set_lr(double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  config_.lr = lr;
}

template <typename Scalar>
void Adam<Scalar>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i]->grad.all_finite()) {
      throw NonFiniteError("non-finite gradient in parameter " + std::to_string(i) + " (" + params_[i]->name + ")");
    }
  }
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_step<Scalar>(params_[i]->value.data(), params_[i]->grad.data(), moments_[i], config_.lr, config_.beta1,
                      config_.beta2, config_.epsilon, t_);
  }
}

PlateauScheduler::PlateauScheduler(PlateauConfig config, double initial_lr) : config_(config), lr_(initial_lr) {
  config_.validate();
}

double PlateauScheduler::step(double val_loss) {
  if (val_loss < best_ - config_.min_delta) {
    best_ = val_loss;
    num_bad_ = 0;
  } else {
    ++num_bad_;
    if (num_bad_ >= config_.patience) {
      // The floor never raises a rate that already sits below it.
      lr_ = std::min(lr_, std::max(lr_ * config_.factor, config_.min_lr));
      num_bad_ = 0;
    }
  }
  return lr_;
}

void PlateauScheduler::restore(double lr, double best, int num_bad) {
  lr_ = lr;
  best_ = best;
  num_bad_ = num_bad;
}

template void adam_step<float>(Tensor<float>::Vector&, const Tensor<float>::Vector&, AdamMoments<float>&, double,
                               double, double, double, std::int64_t);
template void adam_step<double>(Tensor<double>::Vector&, const Tensor<double>::Vector&, AdamMoments<double>&, double,
                                double, double, double, std::int64_t);
template class Adam<float>;
template class Adam<double>;

}  // namespace hfc::nn
