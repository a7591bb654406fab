#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mofir/nn/param_store.hpp"

namespace mofir::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[<flat index>]"
  std::size_t checked = 0;
  bool passed = true;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  /// Denominator floor so that entries whose true gradient is ~0 are judged
  /// on absolute error: rel = |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
};

namespace detail {

inline void record(GradCheckReport& report, double analytic, double numeric,
                   const GradCheckOptions& opt, const std::function<std::string()>& label) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), opt.floor});
  const double rel = std::abs(analytic - numeric) / denom;
  ++report.checked;
  if (!(rel <= report.max_rel_error)) {
    report.max_rel_error = std::isnan(rel) ? INFINITY : rel;
    report.worst = label();
  }
}

}  // namespace detail

/// Compares analytic gradients against central differences of `loss`.
/// `analytic` must leave d(loss)/d(param) in every grad buffer of `store`.
inline GradCheckReport gradient_check(ParamStore<double>& store,
                                      const std::function<double()>& loss,
                                      const std::function<void()>& analytic,
                                      const GradCheckOptions& opt = {}) {
  store.zero_grad();
  analytic();
  GradCheckReport report;
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    const Matrix<double> grad = p.grad;
    for (Index k = 0; k < p.value.size(); ++k) {
      double& v = p.value.data()[k];
      const double saved = v;
      v = saved + opt.step;
      const double up = loss();
      v = saved - opt.step;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      detail::record(report, grad.data()[k], numeric, opt,
                     [&] { return p.name + "[" + std::to_string(k) + "]"; });
    }
  }
  report.passed = report.max_rel_error <= opt.tolerance;
  return report;
}

/// Same check for the gradient with respect to an input matrix.
inline GradCheckReport gradient_check_input(Matrix<double>& input,
                                            const Matrix<double>& analytic,
                                            const std::function<double()>& loss,
                                            const GradCheckOptions& opt = {}) {
  GradCheckReport report;
  for (Index k = 0; k < input.size(); ++k) {
    double& v = input.data()[k];
    const double saved = v;
    v = saved + opt.step;
    const double up = loss();
    v = saved - opt.step;
    const double down = loss();
    v = saved;
    detail::record(report, analytic.data()[k], (up - down) / (2.0 * opt.step), opt,
                   [&] { return "input[" + std::to_string(k) + "]"; });
  }
  report.passed = report.max_rel_error <= opt.tolerance;
  return report;
}

}  // namespace mofir::nn
