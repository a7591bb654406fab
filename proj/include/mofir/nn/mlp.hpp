#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mofir/nn/ops.hpp"

namespace mofir::nn {

/// widths = {input, hidden..., output}; tanh between layers, linear output.
struct MlpSpec {
  std::vector<Index> widths;

  void validate() const {
    if (widths.size() < 3) throw ShapeError("MLP needs at least one hidden layer");
    for (Index w : widths) {
      if (w <= 0) throw ShapeError("MLP widths must be positive");
    }
  }
  Index input() const { return widths.front(); }
  Index output() const { return widths.back(); }
};

template <typename Real>
struct MlpTape {
  std::vector<Matrix<Real>> inputs;  // input of each dense layer
  std::uint64_t version = 0;
};

template <typename Real>
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamStore<Real>& store, const std::string& prefix, MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
      layers_.push_back(Dense::create(store, prefix + "." + std::to_string(l), spec_.widths[l],
                                      spec_.widths[l + 1]));
    }
  }

  template <typename Rng>
  void init(ParamStore<Real>& store, Rng& rng) const {
    for (const auto& layer : layers_) layer.init(store, rng);
  }

  const MlpSpec& spec() const { return spec_; }
  const std::vector<Dense>& layers() const { return layers_; }

  Matrix<Real> forward(const ParamStore<Real>& store, const Matrix<Real>& x,
                       MlpTape<Real>* tape = nullptr) const {
    if (tape) {
      tape->inputs.clear();
      tape->version = store.version();
    }
    Matrix<Real> h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix<Real> y = layers_[l].forward(store, h);
      if (tape) tape->inputs.push_back(std::move(h));
      if (l + 1 < layers_.size()) y = y.array().tanh().matrix();
      h = std::move(y);
    }
    return h;
  }

  /// Returns d(loss)/d(input); parameter gradients are accumulated into the
  /// store unless `accumulate` is false.
  Matrix<Real> backward(ParamStore<Real>& store, const MlpTape<Real>& tape, const Matrix<Real>& dy,
                        bool accumulate = true) const {
    if (tape.version != store.version() || tape.inputs.size() != layers_.size()) {
      throw StaleTapeError("MLP tape does not match the current parameters");
    }
    Matrix<Real> grad = dy;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (l + 1 < layers_.size()) {
        // Output of layer l is tanh(.), which is the input of layer l + 1.
        const auto& act = tape.inputs[l + 1];
        grad = (grad.array() * (Real(1) - act.array().square())).matrix();
      }
      grad = layers_[l].backward(store, tape.inputs[l], grad, accumulate);
    }
    return grad;
  }

 private:
  MlpSpec spec_;
  std::vector<Dense> layers_;
};

}  // namespace mofir::nn
