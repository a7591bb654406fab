#pragma once

#include <array>
#include <random>
#include <stdexcept>
#include <vector>

#include "mofir/env.hpp"

namespace mofir {

using Rng = std::mt19937_64;

/// Weights (utility, fairness) on the 2-simplex.
class PreferenceVector {
 public:
  PreferenceVector() = default;
  PreferenceVector(double utility, double fairness);

  /// (w, 1 - w); throws std::invalid_argument unless w is in [0, 1].
  static PreferenceVector from_utility(double w);

  double utility() const { return w_[0]; }
  double fairness() const { return w_[1]; }
  std::array<double, 2> as_array() const { return w_; }

  double scalarize(const RewardVector& r) const {
    return w_[0] * r.utility + w_[1] * r.fairness;
  }

  bool operator==(const PreferenceVector&) const = default;

 private:
  std::array<double, 2> w_{1.0, 0.0};
};

/// Uniform draw on the simplex: utility weight ~ U[0, 1].
PreferenceVector sample_preference(Rng& rng);

/// `count` evenly spaced utility weights from 0 to 1 (count >= 2), or {1} when
/// count == 1.
std::vector<PreferenceVector> preference_grid(int count);

}  // namespace mofir
