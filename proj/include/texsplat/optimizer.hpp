#pragma once

#include <cstdint>
#include <vector>

namespace texsplat {

/// Adam moments for one parameter group.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  /// In-place update of `params` with gradient `grad` at learning rate `lr`.
  /// Moments are (re)sized on first use or when the group size changes.
  void update(std::vector<double>& params, const std::vector<double>& grad, double lr);
  void reset();
};

} // namespace texsplat
