#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scrbm/model.hpp"

namespace scrbm {

enum class OptimizerKind { Sgd, Adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view s);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators, one buffer per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

// Both models' tensors go through these, so they work on flat spans.
void sgd_update(std::span<double> param, std::span<const double> grad, double lr);
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamConfig& config);

/// theta <- theta - lr * grad.
void sgd_step(ModelParams& params, const Gradients& grads, double lr);

/// One bias-corrected Adam step on every tensor; allocates the moments on
/// first use.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config);

/// Owns the optimizer state for a fixed list of tensors.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const AdamConfig& config) : kind_(kind), config_(config) {}

  template <std::size_t Count>
  void apply(const std::array<std::span<double>, Count>& params,
             const std::array<std::span<const double>, Count>& grads) {
    apply_impl(std::span<const std::span<double>>(params.data(), Count),
               std::span<const std::span<const double>>(grads.data(), Count));
  }

  const AdamState& adam_state() const { return state_; }

 private:
  void apply_impl(std::span<const std::span<double>> params,
                  std::span<const std::span<const double>> grads);

  OptimizerKind kind_;
  AdamConfig config_;
  AdamState state_;
};

}  // namespace scrbm
