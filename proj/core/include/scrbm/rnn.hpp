#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scrbm/model.hpp"

namespace scrbm {

/// Elman network with tanh hidden units and a softmax output. No path exists
/// from a predicted label back into the hidden state.
struct RnnParams {
  ModelDims dims;
  Matrix w_xh;    // M x N
  Matrix w_hh;    // N x N
  Matrix w_hy;    // N x K
  Vector c;       // N
  Vector b;       // K
  Vector h_init;  // N

  static constexpr std::array<std::string_view, 6> kTensorNames = {
      "w_xh", "w_hh", "w_hy", "c", "b", "h_init"};

  static RnnParams zeros(const ModelDims& dims);

  std::array<std::span<double>, 6> tensors();
  std::array<std::span<const double>, 6> tensors() const;
  bool all_finite() const;
  void validate() const;

  /// MN + N^2 + NK + N + K; h_init is bookkept separately.
  std::size_t learnable_count() const;
};

using RnnGradients = RnnParams;

struct RnnForward {
  std::vector<Vector> posteriors;  // per step, length K
  std::vector<Vector> hidden;      // per step, length N
  Vector h0;
};

RnnForward rnn_forward(const RnnParams& params, std::span<const SparseInput> inputs);

struct RnnSequenceGradient {
  double nll = 0.0;
  RnnGradients grads;
};

/// Cross-entropy of the labels and its BPTT gradient.
RnnSequenceGradient rnn_gradients(const RnnParams& params, const SequenceExample& example);

/// Sum of -log p(y^t) over the sequence.
double rnn_nll(const RnnParams& params, const SequenceExample& example);

/// Weights uniform in +-1/sqrt(fan_in), biases zero, h_init zero.
RnnParams init_rnn_params(const ModelDims& dims, std::uint64_t seed);

}  // namespace scrbm
