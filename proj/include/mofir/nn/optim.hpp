#pragma once

#include <cmath>

#include "mofir/nn/param_store.hpp"

namespace mofir::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam descent step on every parameter, then clears the
/// gradients. Throws NumericError before touching anything if a gradient is
/// not finite.
template <typename Real>
void adam_step(ParamStore<Real>& store, const AdamConfig& cfg) {
  for (const auto& p : store) {
    if (!p.grad.allFinite()) throw NumericError("non-finite gradient in '" + p.name + "'");
  }
  const std::int64_t t = store.adam_steps() + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real step = static_cast<Real>(cfg.lr / c1);
  const Real eps = static_cast<Real>(cfg.epsilon);
  const Real root_c2 = static_cast<Real>(std::sqrt(c2));
  for (auto& p : store) {
    p.adam_m = b1 * p.adam_m + (Real(1) - b1) * p.grad;
    p.adam_v = b2 * p.adam_v + (Real(1) - b2) * p.grad.cwiseProduct(p.grad);
    // m_hat / (sqrt(v_hat) + eps) with m_hat = m / c1, v_hat = v / c2.
    p.value.array() -= step * p.adam_m.array() / (p.adam_v.array().sqrt() / root_c2 + eps);
    if (!p.value.allFinite()) throw NumericError("parameter '" + p.name + "' became non-finite");
    p.grad.setZero();
  }
  store.set_adam_steps(t);
  store.touch();
}

/// target <- tau * online + (1 - tau) * target.
template <typename Real>
void soft_update(ParamStore<Real>& target, const ParamStore<Real>& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in [0, 1]");
  if (!target.same_schema(online)) throw ShapeError("soft_update: parameter schemas differ");
  const Real a = static_cast<Real>(tau);
  const Real b = static_cast<Real>(1.0 - tau);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i].value = a * online[i].value + b * target[i].value;
  }
  target.touch();
}

}  // namespace mofir::nn
