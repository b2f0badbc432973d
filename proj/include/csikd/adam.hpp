#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "csikd/tensor.hpp"

namespace csikd {

// Trainable tensor plus its first/second moment estimates.
struct Parameter {
  std::string name;
  Tensor tensor;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  Parameter() = default;
  Parameter(std::string n, Tensor t) : name(std::move(n)), tensor(std::move(t)) {
    tensor.set_requires_grad(true);
    m.assign(tensor.values().size(), 0.0);
    v.assign(tensor.values().size(), 0.0);
  }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update over populated gradients.
inline void adam_step(std::span<Parameter> params, double lr, const AdamConfig& cfg = {}) {
  for (Parameter& p : params) {
    if (p.tensor.grad().empty())
      throw std::runtime_error("adam_step: parameter '" + p.name + "' has no gradient");
    p.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step));
    auto& vals = p.tensor.values();
    const auto& g = p.tensor.grad();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      p.m[i] = cfg.beta1 * p.m[i] + (1.0 - cfg.beta1) * g[i];
      p.v[i] = cfg.beta2 * p.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = p.m[i] / bc1;
      const double vhat = p.v[i] / bc2;
      vals[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

inline void adam_step(const std::vector<Parameter*>& params, double lr,
                      const AdamConfig& cfg = {}) {
  for (Parameter* p : params) adam_step(std::span<Parameter>(p, 1), lr, cfg);
}

inline void zero_grads(std::span<Parameter> params) {
  for (Parameter& p : params) p.tensor.zero_grad();
}

inline void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->tensor.zero_grad();
}

}  // namespace csikd
