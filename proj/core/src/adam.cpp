#include "imb/adam.hpp"

#include <cmath>

#include "imb/error.hpp"

namespace imb {

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate, const AdamConfig& cfg) {
  if (params.size() != grads.size())
    throw ValidationError("adam: parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].shape() != grads[i].shape())
      throw ValidationError("adam: gradient " + std::to_string(i) + " is not congruent");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Tensor::zeros_like(p));
      state.v.push_back(Tensor::zeros_like(p));
    }
  } else if (state.m.size() != params.size()) {
    throw ValidationError("adam: state does not match the parameter list");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].data();
    const double* g = grads[i].data();
    double* m = state.m[i].data();
    double* v = state.v[i].data();
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      p[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

}  // namespace imb
