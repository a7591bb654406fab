#pragma once

#include <array>
#include <string>
#include <vector>

#include "mofir/nn/ops.hpp"

namespace mofir::nn {

struct GruSpec {
  Index input = 16;
  Index hidden = 16;
  int layers = 2;
};

/// Stacked GRU with the reset gate applied before the candidate projection:
///   z = sigmoid(x Wz^T + h Uz^T + bz)
///   r = sigmoid(x Wr^T + h Ur^T + br)
///   n = tanh(x Wn^T + (r * h) Un^T + bn)
///   h' = (1 - z) * n + z * h
/// Every layer starts from a zero hidden state; the stack output is the top
/// layer's hidden state after the last step.
template <typename Real>
class GruStack {
 public:
  struct Step {
    Matrix<Real> x, h_prev, z, r, n, rh;
  };
  struct Tape {
    std::vector<std::vector<Step>> layers;  // [layer][time]
    std::uint64_t version = 0;
  };

  GruStack() = default;
  GruStack(ParamStore<Real>& store, const std::string& prefix, GruSpec spec) : spec_(spec) {
    if (spec.input <= 0 || spec.hidden <= 0 || spec.layers <= 0) {
      throw ShapeError("GRU sizes must be positive");
    }
    for (int l = 0; l < spec.layers; ++l) {
      const Index in = l == 0 ? spec.input : spec.hidden;
      const std::string p = prefix + "." + std::to_string(l);
      Cell c;
      for (int g = 0; g < 3; ++g) {
        const char* gate = kGateNames[g];
        c.w[g] = store.add(p + ".w_" + gate, spec.hidden, in);
        c.u[g] = store.add(p + ".u_" + gate, spec.hidden, spec.hidden);
        c.b[g] = store.add(p + ".b_" + gate, 1, spec.hidden);
      }
      c.in = in;
      cells_.push_back(c);
    }
  }

  template <typename Rng>
  void init(ParamStore<Real>& store, Rng& rng) const {
    for (const auto& c : cells_) {
      for (int g = 0; g < 3; ++g) {
        store.init_uniform(c.w[g], spec_.hidden, rng);
        store.init_uniform(c.u[g], spec_.hidden, rng);
        store.init_uniform(c.b[g], spec_.hidden, rng);
      }
    }
  }

  const GruSpec& spec() const { return spec_; }

  /// `sequence[t]` is a (batch x input) matrix. Returns (batch x hidden).
  Matrix<Real> forward(const ParamStore<Real>& store, const std::vector<Matrix<Real>>& sequence,
                       Tape* tape = nullptr) const {
    if (sequence.empty()) throw ShapeError("GRU needs a sequence of length >= 1");
    const Index batch = sequence.front().rows();
    for (const auto& x : sequence) {
      if (x.rows() != batch || x.cols() != spec_.input) {
        throw ShapeError("GRU input step has shape " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + ", expected " + std::to_string(batch) + "x" +
                         std::to_string(spec_.input));
      }
    }
    if (tape) {
      tape->layers.assign(cells_.size(), {});
      tape->version = store.version();
    }
    std::vector<Matrix<Real>> inputs = sequence;
    for (std::size_t l = 0; l < cells_.size(); ++l) {
      const Cell& c = cells_[l];
      Matrix<Real> h = Matrix<Real>::Zero(batch, spec_.hidden);
      for (auto& x : inputs) {
        Step s;
        s.z = gate(store, c, 0, x, h).unaryExpr([](Real v) { return sigmoid(v); });
        s.r = gate(store, c, 1, x, h).unaryExpr([](Real v) { return sigmoid(v); });
        s.rh = s.r.cwiseProduct(h);
        s.n = gate(store, c, 2, x, s.rh).array().tanh().matrix();
        Matrix<Real> next =
            ((Real(1) - s.z.array()) * s.n.array() + s.z.array() * h.array()).matrix();
        if (tape) {
          s.x = x;
          s.h_prev = h;
          tape->layers[l].push_back(std::move(s));
        }
        h = next;
        x = std::move(next);  // becomes the input of the layer above
      }
    }
    return inputs.back();
  }

  /// Backpropagation through time from d(loss)/d(final hidden). Returns the
  /// gradient with respect to each input step.
  std::vector<Matrix<Real>> backward(ParamStore<Real>& store, const Tape& tape,
                                     const Matrix<Real>& d_final, bool accumulate = true) const {
    if (tape.version != store.version() || tape.layers.size() != cells_.size()) {
      throw StaleTapeError("GRU tape does not match the current parameters");
    }
    const std::size_t steps = tape.layers.front().size();
    // Gradient arriving at each layer output from above; only the top layer's
    // last step receives an external gradient.
    std::vector<Matrix<Real>> d_out(steps, Matrix<Real>::Zero(d_final.rows(), spec_.hidden));
    d_out.back() = d_final;

    for (std::size_t l = cells_.size(); l-- > 0;) {
      const Cell& c = cells_[l];
      std::vector<Matrix<Real>> d_in(steps);
      Matrix<Real> dh_next = Matrix<Real>::Zero(d_final.rows(), spec_.hidden);
      for (std::size_t t = steps; t-- > 0;) {
        const Step& s = tape.layers[l][t];
        Matrix<Real> dh = d_out[t] + dh_next;

        Matrix<Real> dn = (dh.array() * (Real(1) - s.z.array())).matrix();
        Matrix<Real> dz = (dh.array() * (s.h_prev.array() - s.n.array())).matrix();
        Matrix<Real> dh_prev = (dh.array() * s.z.array()).matrix();

        Matrix<Real> da_n = (dn.array() * (Real(1) - s.n.array().square())).matrix();
        Matrix<Real> dx = da_n * store.value(c.w[2]);
        Matrix<Real> drh = da_n * store.value(c.u[2]);
        if (accumulate) accumulate_gate(store, c, 2, da_n, s.x, s.rh);

        Matrix<Real> dr = drh.cwiseProduct(s.h_prev);
        dh_prev += drh.cwiseProduct(s.r);
        Matrix<Real> da_r = (dr.array() * s.r.array() * (Real(1) - s.r.array())).matrix();
        dx.noalias() += da_r * store.value(c.w[1]);
        dh_prev.noalias() += da_r * store.value(c.u[1]);
        if (accumulate) accumulate_gate(store, c, 1, da_r, s.x, s.h_prev);

        Matrix<Real> da_z = (dz.array() * s.z.array() * (Real(1) - s.z.array())).matrix();
        dx.noalias() += da_z * store.value(c.w[0]);
        dh_prev.noalias() += da_z * store.value(c.u[0]);
        if (accumulate) accumulate_gate(store, c, 0, da_z, s.x, s.h_prev);

        d_in[t] = std::move(dx);
        dh_next = std::move(dh_prev);
      }
      d_out = std::move(d_in);
    }
    return d_out;
  }

 private:
  static constexpr const char* kGateNames[3] = {"z", "r", "n"};

  struct Cell {
    std::array<std::size_t, 3> w{}, u{}, b{};
    Index in = 0;
  };

  static Matrix<Real> gate(const ParamStore<Real>& store, const Cell& c, int g,
                           const Matrix<Real>& x, const Matrix<Real>& h) {
    Matrix<Real> a = x * store.value(c.w[g]).transpose();
    a.noalias() += h * store.value(c.u[g]).transpose();
    a.rowwise() += store.value(c.b[g]).row(0);
    return a;
  }

  static void accumulate_gate(ParamStore<Real>& store, const Cell& c, int g,
                              const Matrix<Real>& da, const Matrix<Real>& x,
                              const Matrix<Real>& h) {
    store.grad(c.w[g]).noalias() += da.transpose() * x;
    store.grad(c.u[g]).noalias() += da.transpose() * h;
    store.grad(c.b[g]).row(0) += da.colwise().sum();
  }

  GruSpec spec_;
  std::vector<Cell> cells_;
};

}  // namespace mofir::nn
