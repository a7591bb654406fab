#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mofir/nn/param_store.hpp"

namespace mofir::nn {

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

/// Numerically safe softmax (max subtracted first).
template <typename Real>
std::vector<Real> softmax(std::span<const Real> logits) {
  std::vector<Real> out(logits.size());
  if (logits.empty()) return out;
  const Real top = *std::max_element(logits.begin(), logits.end());
  Real total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

/// Fully connected layer y = x W^T + b over a batch of row vectors.
struct Dense {
  std::size_t weight = 0;
  std::size_t bias = 0;
  Index in = 0;
  Index out = 0;

  template <typename Real>
  static Dense create(ParamStore<Real>& store, const std::string& prefix, Index in, Index out) {
    Dense d;
    d.in = in;
    d.out = out;
    d.weight = store.add(prefix + ".weight", out, in);
    d.bias = store.add(prefix + ".bias", 1, out);
    return d;
  }

  template <typename Real, typename Rng>
  void init(ParamStore<Real>& store, Rng& rng) const {
    store.init_uniform(weight, in, rng);
    store.init_uniform(bias, in, rng);
  }

  template <typename Real>
  Matrix<Real> forward(const ParamStore<Real>& store, const Matrix<Real>& x) const {
    if (x.cols() != in) {
      throw ShapeError("dense layer expects " + std::to_string(in) + " inputs, got " +
                       std::to_string(x.cols()));
    }
    Matrix<Real> y = x * store.value(weight).transpose();
    y.rowwise() += store.value(bias).row(0);
    return y;
  }

  /// Accumulates dW += dy^T x and db += sum_rows(dy) when `accumulate` is set;
  /// always returns dx = dy W.
  template <typename Real>
  Matrix<Real> backward(ParamStore<Real>& store, const Matrix<Real>& x, const Matrix<Real>& dy,
                        bool accumulate = true) const {
    if (accumulate) {
      store.grad(weight).noalias() += dy.transpose() * x;
      store.grad(bias).row(0) += dy.colwise().sum();
    }
    return dy * store.value(weight);
  }
};

}  // namespace mofir::nn
