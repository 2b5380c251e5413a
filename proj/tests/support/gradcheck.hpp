#pragma once

// Central finite-difference check of every parameter of a model instance.

#include <algorithm>
#include <cmath>
#include <string>

#include "fexp/model.hpp"

namespace oracle {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  std::size_t checked = 0;
};

/// Relative error with a floor of 1e-6 on the denominator.
inline double relative_error(double analytic, double numeric)
{
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

inline GradCheckResult gradient_check(const fexp::MaskedInput& input, const std::vector<int>& target,
                                      fexp::ModelParams params, double h = 1e-5)
{
  const auto pass = fexp::forward_loss(input, target, params);
  const auto grads = fexp::backward(pass, params);
  GradCheckResult result;
  auto analytic = grads.params.tensors();
  auto tensors = params.tensors();
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    auto data = tensors[ti].second->data();
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double saved = data[k];
      data[k] = saved + h;
      const double plus = fexp::forward_loss(input, target, params).loss;
      data[k] = saved - h;
      const double minus = fexp::forward_loss(input, target, params).loss;
      data[k] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double err = relative_error(analytic[ti].second->data()[k], numeric);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = tensors[ti].first;
      }
    }
  }
  return result;
}

}  // namespace oracle
