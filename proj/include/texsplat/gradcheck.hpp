#pragma once

#include "texsplat/train.hpp"

#include <cstdint>
#include <vector>

namespace texsplat {

struct GradcheckOptions {
  double epsilon = 1e-6;
  /// Per class: the largest-gradient entries plus random ones up to this count.
  int max_params_per_class = 24;
  std::uint64_t seed = 0;
  /// Empty checks every class that has parameters.
  std::vector<ParamClass> classes;
  LossWeights weights;
  RenderSettings settings;
  double floor = 1e-6;
};

struct ClassReport {
  ParamClass cls = ParamClass::Position;
  std::size_t param_count = 0;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool pass() const { return max_rel_error <= threshold; }
};

struct GradcheckReport {
  std::vector<ClassReport> classes;
  double loss = 0.0;

  bool pass() const;
};

/// 5e-3 for positions, 1e-3 otherwise.
double gradcheck_threshold(ParamClass c);

/// |a - f| / max(|a|, |f|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Central differences of the full objective against the analytic gradient.
/// Single-precision parameters use the realized step after rounding.
GradcheckReport gradcheck(const Scene& scene, const View& view, const GradcheckOptions& opts = {});

} // namespace texsplat
