#include "mofir/agent/preference.hpp"

#include <cmath>
#include <string>

namespace mofir {

PreferenceVector::PreferenceVector(double utility, double fairness) : w_{utility, fairness} {
  if (!(utility >= 0.0 && utility <= 1.0 && fairness >= 0.0 && fairness <= 1.0) ||
      std::abs(utility + fairness - 1.0) > 1e-9) {
    throw std::invalid_argument("preference (" + std::to_string(utility) + ", " +
                                std::to_string(fairness) + ") is not on the simplex");
  }
}

PreferenceVector PreferenceVector::from_utility(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("utility weight " + std::to_string(w) + " outside [0, 1]");
  }
  return PreferenceVector(w, 1.0 - w);
}

PreferenceVector sample_preference(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return PreferenceVector::from_utility(dist(rng));
}

std::vector<PreferenceVector> preference_grid(int count) {
  if (count < 1) throw std::invalid_argument("preference grid needs at least one point");
  if (count == 1) return {PreferenceVector::from_utility(1.0)};
  std::vector<PreferenceVector> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(PreferenceVector::from_utility(static_cast<double>(k) / (count - 1)));
  }
  return out;
}

}  // namespace mofir
