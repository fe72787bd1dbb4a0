#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pickroute/tensor.hpp"

namespace pickroute {

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws ContractViolation unless 0 < beta < 1 and lr, epsilon > 0.
  void validate() const;
};

/// Named trainable tensor with its Adam moment buffers.
struct Parameter {
  std::string name;
  autodiff::Tensor value;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  Parameter(std::string name, autodiff::Tensor value);
};

/// Gradients aligned with a parameter list, one flat vector per parameter.
using GradientMap = std::vector<std::vector<double>>;

/// Copies the accumulated gradients (zeros where none reached a parameter).
GradientMap collect_gradients(const std::vector<Parameter>& params);
void zero_gradients(std::vector<Parameter>& params);

GradientMap zeros_like(const std::vector<Parameter>& params);
/// acc += factor * g, elementwise.
void accumulate(GradientMap& acc, const GradientMap& g, double factor = 1.0);
double gradient_norm(const GradientMap& grads);
bool all_finite(const GradientMap& grads);

/// Bias-corrected Adam update in place.
void adam_step(std::vector<Parameter>& params, const GradientMap& grads, const AdamConfig& cfg);

}  // namespace pickroute
