#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mofir::nn {

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

using Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value reached a gradient or parameter.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// backward() was handed a tape recorded before the last parameter update.
class StaleTapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <typename Real>
struct Parameter {
  std::string name;
  Matrix<Real> value;
  Matrix<Real> grad;
  Matrix<Real> adam_m;
  Matrix<Real> adam_v;
};

/// Named parameters with their gradient and Adam moment buffers. Layers refer
/// to their parameters by index, so a copied store (a target network) keeps
/// working with the same layer objects.
template <typename Real>
class ParamStore {
 public:
  std::size_t add(std::string name, Index rows, Index cols) {
    if (rows <= 0 || cols <= 0) throw ShapeError("parameter '" + name + "' has an empty shape");
    Parameter<Real> p;
    p.name = std::move(name);
    p.value = Matrix<Real>::Zero(rows, cols);
    p.grad = Matrix<Real>::Zero(rows, cols);
    p.adam_m = Matrix<Real>::Zero(rows, cols);
    p.adam_v = Matrix<Real>::Zero(rows, cols);
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  Parameter<Real>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<Real>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  const Matrix<Real>& value(std::size_t i) const { return params_[i].value; }
  Matrix<Real>& grad(std::size_t i) { return params_[i].grad; }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  /// Incremented whenever values change through the optimizer or a target
  /// update; tapes remember the version they were recorded at.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t steps) { adam_steps_ = steps; }

  std::size_t num_values() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  bool same_schema(const ParamStore& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& a = params_[i];
      const auto& b = other.params_[i];
      if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
        return false;
      }
    }
    return true;
  }

  /// Copy with a different scalar type (float checkpoints checked in double).
  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& p : params_) {
      std::size_t k = out.add(p.name, p.value.rows(), p.value.cols());
      out[k].value = p.value.template cast<Other>();
      out[k].adam_m = p.adam_m.template cast<Other>();
      out[k].adam_v = p.adam_v.template cast<Other>();
    }
    out.set_adam_steps(adam_steps_);
    return out;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) fill of one parameter.
  template <typename Rng>
  void init_uniform(std::size_t i, Index fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto& v = params_[i].value;
    for (Index k = 0; k < v.size(); ++k) v.data()[k] = static_cast<Real>(dist(rng));
    touch();
  }

 private:
  std::vector<Parameter<Real>> params_;
  std::uint64_t version_ = 0;
  std::int64_t adam_steps_ = 0;
};

}  // namespace mofir::nn
