#include "texsplat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace texsplat {

bool GradcheckReport::pass() const {
  return std::all_of(classes.begin(), classes.end(), [](const ClassReport& r) { return r.pass(); });
}

double gradcheck_threshold(ParamClass c) { return c == ParamClass::Position ? 5e-3 : 1e-3; }

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

std::vector<std::size_t> pick_indices(const std::vector<double>& grad, int budget,
                                      std::mt19937_64& rng) {
  const std::size_t n = grad.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (budget <= 0 || n <= static_cast<std::size_t>(budget)) {
    return all;
  }
  std::stable_sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(grad[a]) > std::abs(grad[b]);
  });
  const std::size_t top = static_cast<std::size_t>(budget) / 2;
  std::vector<std::size_t> picked(all.begin(), all.begin() + top);
  std::vector<std::size_t> rest(all.begin() + top, all.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  picked.insert(picked.end(), rest.begin(), rest.begin() + (budget - top));
  std::sort(picked.begin(), picked.end());
  return picked;
}

} // namespace

GradcheckReport gradcheck(const Scene& scene, const View& view, const GradcheckOptions& opts) {
  GradcheckReport report;
  SceneGradients grads = SceneGradients::zeros_like(scene);
  report.loss = evaluate_objective(scene, view, opts.weights, opts.settings, &grads).total;

  std::vector<ParamClass> classes = opts.classes;
  if (classes.empty()) {
    classes.assign(kAllParamClasses.begin(), kAllParamClasses.end());
  }
  std::mt19937_64 rng(opts.seed);
  Scene probe = scene;
  for (ParamClass c : classes) {
    if (c == ParamClass::Environment && !scene.environment.learnable) {
      continue;
    }
    const std::vector<double> base = gather_params(scene, c);
    if (base.empty()) {
      continue;
    }
    const std::vector<double> analytic = gather_grads(grads, c);
    ClassReport cr;
    cr.cls = c;
    cr.param_count = base.size();
    cr.threshold = gradcheck_threshold(c);
    for (std::size_t i : pick_indices(analytic, opts.max_params_per_class, rng)) {
      std::vector<double> values = base;
      values[i] = base[i] + opts.epsilon;
      scatter_params(probe, c, values);
      const double x_plus = gather_params(probe, c)[i];
      const double l_plus = evaluate_objective(probe, view, opts.weights, opts.settings).total;
      values[i] = base[i] - opts.epsilon;
      scatter_params(probe, c, values);
      const double x_minus = gather_params(probe, c)[i];
      const double l_minus = evaluate_objective(probe, view, opts.weights, opts.settings).total;
      scatter_params(probe, c, base);
      const double numeric = (l_plus - l_minus) / (x_plus - x_minus);
      const double err = relative_error(analytic[i], numeric, opts.floor);
      ++cr.checked;
      if (err > cr.max_rel_error || cr.checked == 1) {
        cr.max_rel_error = std::max(err, cr.max_rel_error);
        if (err >= cr.max_rel_error) {
          cr.worst_index = i;
          cr.worst_analytic = analytic[i];
          cr.worst_numeric = numeric;
        }
      }
    }
    report.classes.push_back(cr);
  }
  return report;
}

} // namespace texsplat
