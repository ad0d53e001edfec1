#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "scrbm/model.hpp"
#include "scrbm/rnn.hpp"

// Brute-force reference computations. Everything here is written as plain
// scalar loops in long double over the raw parameter arrays; none of it calls
// into the inference or training kernels it is used to check.

namespace scrbm::oracle {

struct OracleLimits {
  std::size_t max_hidden = 12;              // enumerate at most 2^12 hidden states
  std::size_t max_label_sequences = 4096;   // K^T bound
};

/// Energy of a binary hidden configuration, recomputed independently.
double energy(const ModelParams& params, const SparseInput& x, std::size_t y,
              std::span<const int> h, const Vector& h_prev);

/// -log sum over all 2^N hidden configurations of exp(-energy).
double brute_force_free_energy(const ModelParams& params, const SparseInput& x, std::size_t y,
                               const Vector& h_prev, const OracleLimits& limits = {});

/// p(y | x, h_prev) by exhaustive marginalization of the hidden layer.
/// Throws OracleLimitExceeded when N > limits.max_hidden.
Vector brute_force_label_posterior(const ModelParams& params, const SparseInput& x,
                                   const Vector& h_prev, const OracleLimits& limits = {});

/// Teacher-forced sequence NLL in extended precision, honouring
/// params.options the same way the model does.
long double sequence_nll(const ModelParams& params, const SequenceExample& example);

/// Central differences of `sequence_nll` for every parameter, h_init included.
Gradients finite_difference_gradients(const ModelParams& params, const SequenceExample& example,
                                      double epsilon = 1e-5);

/// Central difference of a scalar function; used to self-test the harness.
double central_difference(const std::function<double(double)>& f, double at, double epsilon);

/// Sum over all K^T label sequences of prod_t p(y^t | x^t, h_hat^{t-1}) with
/// the states held fixed. `states[t]` is the state entering step t.
double check_factored_normalization(const ModelParams& params,
                                    std::span<const SparseInput> inputs,
                                    std::span<const Vector> states,
                                    const OracleLimits& limits = {});

// ---- the RNN baseline ----------------------------------------------------------

long double rnn_sequence_nll(const RnnParams& params, const SequenceExample& example);
RnnGradients rnn_finite_difference_gradients(const RnnParams& params,
                                             const SequenceExample& example,
                                             double epsilon = 1e-5);

// ---- comparison and random instances -------------------------------------------

/// Max over components of |a - b| / max(|a|, |b|, 1e-8).
double max_relative_error(std::span<const std::span<const double>> a,
                          std::span<const std::span<const double>> b);

template <typename P>
double max_relative_error(const P& a, const P& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  return max_relative_error(std::span<const std::span<const double>>(ta.data(), ta.size()),
                            std::span<const std::span<const double>>(tb.data(), tb.size()));
}

struct RandomSpec {
  std::size_t max_visible = 5;
  std::size_t max_hidden = 6;
  std::size_t max_classes = 4;
  std::size_t max_length = 6;
  double weight_scale = 1.0;
};

/// Dims drawn uniformly in [1, max] (classes in [2, max]).
ModelDims random_dims(std::mt19937_64& rng, const RandomSpec& spec);

/// Weights and biases uniform in +-scale; h_init uniform in [0, 1].
ModelParams random_params(std::mt19937_64& rng, const ModelDims& dims, double scale = 1.0,
                          ModelOptions options = {});
RnnParams random_rnn_params(std::mt19937_64& rng, const ModelDims& dims, double scale = 1.0);

/// Each visible unit active with probability 1/2, value uniform in [0.5, 1.5].
SparseInput random_input(std::mt19937_64& rng, std::size_t n_visible);
SequenceExample random_example(std::mt19937_64& rng, const ModelDims& dims, std::size_t length);

}  // namespace scrbm::oracle
