#include "hfclass/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hfclass/nn/train.hpp"

namespace hfc::nn {

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

namespace {

void record(GradCheckResult& r, double a, double n, const std::string& where) {
  const double rel = relative_error(a, n);
  r.max_abs_error = std::max(r.max_abs_error, std::abs(a - n));
  if (rel > r.max_rel_error || r.checked == 0) {
    r.max_rel_error = rel;
    r.worst = where;
  }
  ++r.checked;
}

// Perturbs every entry of `values`, compares d loss / d value with `analytic`.
void check_values(GradCheckResult& r, Eigen::VectorXd& values, const Eigen::VectorXd& analytic,
                  const std::function<double()>& loss, double h, const std::string& label) {
  for (Index i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss();
    values[i] = saved - h;
    const double down = loss();
    values[i] = saved;
    record(r, analytic[i], (up - down) / (2.0 * h), label + "[" + std::to_string(i) + "]");
  }
}

}  // namespace

GradCheckResult grad_check_layer(Layer<double>& layer, const Tensor<double>& input, std::uint64_t seed, Mode mode,
                                 double h) {
  auto* dropout = dynamic_cast<Dropout<double>*>(&layer);
  Tensor<double> x = input;
  Tensor<double> y = layer.forward(x, mode);
  if (dropout) dropout->freeze_mask(true);

  Rng rng(seed);
  Tensor<double> w(y.shape());
  for (Index i = 0; i < w.size(); ++i) w[i] = rng.normal();

  auto loss = [&] { return layer.forward(x, mode).data().dot(w.data()); };
  layer.forward(x, mode);
  const Tensor<double> dx = layer.backward(w);

  GradCheckResult r;
  for (auto* p : layer.parameters()) {
    const Eigen::VectorXd analytic = p->grad.data();
    check_values(r, p->value.data(), analytic, loss, h, p->name);
  }
  check_values(r, x.data(), dx.data(), loss, h, "input");
  if (dropout) dropout->freeze_mask(false);
  return r;
}

GradCheckResult grad_check_model(Model<double>& model, const Tensor<double>& input, const std::vector<int>& labels,
                                 Mode mode, double h) {
  Tensor<double> x = input;
  model.forward(x, mode);
  model.freeze_dropout(true);

  auto loss = [&] { return cross_entropy(model.forward(x, mode), labels); };
  const Tensor<double> p = model.forward(x, mode);
  const Tensor<double> dx = model.backward_logits(cross_entropy_logit_grad(p, labels));

  GradCheckResult r;
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::VectorXd analytic = params[i]->grad.data();
    check_values(r, params[i]->value.data(), analytic, loss, h,
                 "param" + std::to_string(i) + "." + params[i]->name);
  }
  check_values(r, x.data(), dx.data(), loss, h, "input");
  model.freeze_dropout(false);
  return r;
}

}  // namespace hfc::nn
