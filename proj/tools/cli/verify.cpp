#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "scrbm/inference.hpp"
#include "scrbm/oracle.hpp"
#include "scrbm/training.hpp"

namespace scrbm::cli {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

constexpr double kGradTolerance = 1e-6;
constexpr double kFdEpsilon = 1e-5;

std::size_t draw_length(std::mt19937_64& rng, std::size_t max_len) {
  return std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
}

template <typename G>
void flip(G& g) {
  for (auto t : g.tensors()) {
    for (double& v : t) v = -v;
  }
}

}  // namespace

SuiteResult run_gradcheck(std::size_t trials, std::uint64_t seed, FaultInjection fault) {
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  const oracle::RandomSpec spec;  // M<=5, N<=6, K<=4, T<=6
  SuiteResult r{"gradcheck", trials, 0.0, kGradTolerance, 0.0};
  for (std::size_t i = 0; i < trials; ++i) {
    const ModelDims dims = oracle::random_dims(rng, spec);
    const ModelParams params = oracle::random_params(rng, dims);
    const SequenceExample ex = oracle::random_example(rng, dims, draw_length(rng, spec.max_length));
    Gradients analytic = sequence_gradients(params, ex).grads;
    if (fault == FaultInjection::SignFlip) flip(analytic);
    const Gradients numeric = oracle::finite_difference_gradients(params, ex, kFdEpsilon);
    r.max_error = std::max(r.max_error, oracle::max_relative_error(analytic, numeric));
  }
  r.seconds = clock.seconds();
  return r;
}

SuiteResult run_rnn_gradcheck(std::size_t trials, std::uint64_t seed, FaultInjection fault) {
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  const oracle::RandomSpec spec;
  SuiteResult r{"rnn-gradcheck", trials, 0.0, kGradTolerance, 0.0};
  for (std::size_t i = 0; i < trials; ++i) {
    const ModelDims dims = oracle::random_dims(rng, spec);
    const RnnParams params = oracle::random_rnn_params(rng, dims);
    const SequenceExample ex = oracle::random_example(rng, dims, draw_length(rng, spec.max_length));
    RnnGradients analytic = rnn_gradients(params, ex).grads;
    if (fault == FaultInjection::SignFlip) flip(analytic);
    const RnnGradients numeric = oracle::rnn_finite_difference_gradients(params, ex, kFdEpsilon);
    r.max_error = std::max(r.max_error, oracle::max_relative_error(analytic, numeric));
  }
  r.seconds = clock.seconds();
  return r;
}

SuiteResult run_oracle_suite(std::size_t trials, std::uint64_t seed) {
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  oracle::RandomSpec spec;
  spec.max_visible = 6;
  spec.max_hidden = 10;
  spec.max_classes = 5;
  SuiteResult r{"oracle", trials, 0.0, 1e-10, 0.0};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < trials; ++i) {
    const ModelDims dims = oracle::random_dims(rng, spec);
    const ModelParams params = oracle::random_params(rng, dims);
    const SparseInput x = oracle::random_input(rng, dims.n_visible);
    Vector h_prev(static_cast<Eigen::Index>(dims.n_hidden));
    for (auto& v : h_prev) v = unit(rng);
    const Vector fast = label_posterior(params, x, h_prev).posterior;
    const Vector exact = oracle::brute_force_label_posterior(params, x, h_prev);
    r.max_error = std::max(r.max_error, (fast - exact).cwiseAbs().maxCoeff());
  }
  r.seconds = clock.seconds();
  return r;
}

SuiteResult run_normalization_suite(std::size_t trials, std::uint64_t seed) {
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  oracle::RandomSpec spec;
  spec.max_hidden = 6;
  SuiteResult r{"normalization", trials, 0.0, 1e-10, 0.0};
  for (std::size_t i = 0; i < trials; ++i) {
    ModelDims dims = oracle::random_dims(rng, spec);
    dims.n_classes = 3;
    const ModelParams params = oracle::random_params(rng, dims);
    const SequenceExample ex = oracle::random_example(rng, dims, draw_length(rng, 5));
    // Any fixed states will do; take them from a teacher-forced pass.
    const ForwardTrace trace = teacher_forced_forward(params, ex).trace;
    std::vector<Vector> states;
    for (std::size_t t = 0; t < ex.length(); ++t) states.push_back(trace.state_before(t));
    const double total = oracle::check_factored_normalization(params, ex.inputs, states);
    r.max_error = std::max(r.max_error, std::abs(total - 1.0));
  }
  r.seconds = clock.seconds();
  return r;
}

}  // namespace scrbm::cli
