#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfclass/nn/model.hpp"

namespace hfc::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst;  // where the largest relative error occurred
  Index checked = 0;  // number of scalar derivatives compared
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps derivatives that are
/// zero up to rounding from dominating.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Compares a layer's analytic gradients with central differences of the
/// scalar loss sum(w * layer(x)) for a fixed random w, over every parameter
/// and input element. Dropout masks are frozen for the duration.
GradCheckResult grad_check_layer(Layer<double>& layer, const Tensor<double>& input, std::uint64_t seed,
                                 Mode mode = Mode::train, double h = 1e-5);

/// Same comparison for a whole model under mean cross-entropy loss, with the
/// analytic gradient taken through the logit shortcut.
GradCheckResult grad_check_model(Model<double>& model, const Tensor<double>& input, const std::vector<int>& labels,
                                 Mode mode = Mode::train, double h = 1e-5);

}  // namespace hfc::nn
