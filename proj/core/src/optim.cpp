#include "pickroute/optim.hpp"

#include <cmath>

#include "pickroute/error.hpp"

namespace pickroute {

void AdamConfig::validate() const {
  if (!(learning_rate > 0)) throw ContractViolation("adam: learning rate must be positive");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
    throw ContractViolation("adam: betas must lie in (0, 1)");
  }
  if (!(epsilon > 0)) throw ContractViolation("adam: epsilon must be positive");
}

Parameter::Parameter(std::string name_, autodiff::Tensor value_)
    : name(std::move(name_)),
      value(std::move(value_)),
      m(value.size(), 0.0),
      v(value.size(), 0.0) {}

GradientMap collect_gradients(const std::vector<Parameter>& params) {
  GradientMap out;
  out.reserve(params.size());
  for (const auto& p : params) {
    const auto g = p.value.grad();
    if (g.empty()) {
      out.emplace_back(p.value.size(), 0.0);
    } else {
      out.emplace_back(g.begin(), g.end());
    }
  }
  return out;
}

void zero_gradients(std::vector<Parameter>& params) {
  for (auto& p : params) p.value.zero_grad();
}

GradientMap zeros_like(const std::vector<Parameter>& params) {
  GradientMap out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.value.size(), 0.0);
  return out;
}

void accumulate(GradientMap& acc, const GradientMap& g, double factor) {
  if (acc.size() != g.size()) throw ContractViolation("accumulate: gradient maps differ in size");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].size() != g[i].size()) {
      throw ContractViolation("accumulate: gradient shapes differ");
    }
    for (std::size_t j = 0; j < acc[i].size(); ++j) acc[i][j] += factor * g[i][j];
  }
}

double gradient_norm(const GradientMap& grads) {
  double total = 0;
  for (const auto& g : grads)
    for (double x : g) total += x * x;
  return std::sqrt(total);
}

bool all_finite(const GradientMap& grads) {
  for (const auto& g : grads)
    for (double x : g)
      if (!std::isfinite(x)) return false;
  return true;
}

void adam_step(std::vector<Parameter>& params, const GradientMap& grads, const AdamConfig& cfg) {
  cfg.validate();
  if (grads.size() != params.size()) {
    throw ContractViolation("adam_step: " + std::to_string(grads.size()) + " gradients for " +
                            std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    const auto& g = grads[i];
    if (g.size() != p.value.size()) {
      throw ContractViolation("adam_step: gradient size mismatch for " + p.name);
    }
    ++p.step;
    const double t = static_cast<double>(p.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    auto values = p.value.mutable_values();
    for (std::size_t j = 0; j < g.size(); ++j) {
      p.m[j] = cfg.beta1 * p.m[j] + (1 - cfg.beta1) * g[j];
      p.v[j] = cfg.beta2 * p.v[j] + (1 - cfg.beta2) * g[j] * g[j];
      const double m_hat = p.m[j] / c1;
      const double v_hat = p.v[j] / c2;
      values[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace pickroute
