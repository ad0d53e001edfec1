#include "scrbm/optimizer.hpp"

#include <cmath>
#include <string>

#include "scrbm/errors.hpp"

namespace scrbm {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw ContractViolation("unknown optimizer '" + std::string(s) + "'");
}

void sgd_update(std::span<double> param, std::span<const double> grad, double lr) {
  if (param.size() != grad.size()) throw ContractViolation("gradient shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamConfig& config) {
  if (param.size() != grad.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ContractViolation("adam buffers do not match parameter shape");
  }
  const double t = static_cast<double>(step);
  const double m_corr = 1.0 - std::pow(config.beta1, t);
  const double v_corr = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    param[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void sgd_step(ModelParams& params, const Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw ContractViolation("learning rate must be positive");
  auto p = params.tensors();
  auto g = grads.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) sgd_update(p[i], g[i], lr);
}

namespace {

void ensure_moments(AdamState& state, std::span<const std::span<double>> params) {
  if (state.m.size() == params.size()) return;
  state.m.clear();
  state.v.clear();
  for (auto p : params) {
    state.m.emplace_back(p.size(), 0.0);
    state.v.emplace_back(p.size(), 0.0);
  }
  state.step = 0;
}

void adam_all(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads, AdamState& state,
              const AdamConfig& config) {
  ensure_moments(state, params);
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i], grads[i], state.m[i], state.v[i], state.step, config);
  }
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config) {
  auto p = params.tensors();
  auto g = grads.tensors();
  adam_all(p, g, state, config);
}

void Optimizer::apply_impl(std::span<const std::span<double>> params,
                           std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw ContractViolation("gradient tensor count mismatch");
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      sgd_update(params[i], grads[i], config_.learning_rate);
    }
  } else {
    adam_all(params, grads, state_, config_);
  }
}

}  // namespace scrbm
