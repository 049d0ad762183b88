#include "texsplat/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace texsplat {

void AdamState::update(std::vector<double>& params, const std::vector<double>& grad, double lr) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("AdamState::update: parameter and gradient sizes differ");
  }
  if (m.size() != params.size()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
    step = 0;
  }
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

void AdamState::reset() {
  step = 0;
  m.clear();
  v.clear();
}

} // namespace texsplat
