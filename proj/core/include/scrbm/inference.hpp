#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scrbm/model.hpp"

namespace scrbm {

/// Probabilities below this are clamped before taking logs.
inline constexpr double kProbabilityFloor = 1e-300;

/// log(1 + e^z) without overflow.
double softplus(double z);
double sigmoid(double z);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(const Vector& v);

/// Local energy of a binary hidden configuration `h` given the previous
/// mean-field state. The visible-bias term is not part of the model.
double energy(const ModelParams& params, const SparseInput& x, std::size_t y, const Vector& h,
              const Vector& h_prev);

/// -log sum_h exp(-E(x, y, h; h_prev)), with the recurrent input included
/// unless params.options selects the printed form.
double free_energy(const ModelParams& params, const SparseInput& x, std::size_t y,
                   const Vector& h_prev);

/// Everything computed at one time step. `h_mean` is empty until the
/// mean-field update has run.
struct StepActivation {
  Vector recurrent_in;     // W_hh^T h_prev
  Matrix preact;           // K x N, argument of each softplus
  Vector neg_free_energy;  // -F(x, y, h_prev) per class
  Vector posterior;        // p(y | x, h_prev)
  Vector h_mean;           // mean-field hidden state after this step
};

enum class FeedbackMode { TeacherForced, Predicted };

struct ForwardTrace {
  std::vector<StepActivation> steps;
  Vector per_step_nll;  // zero at unscored steps; empty if no labels were given
  FeedbackMode mode = FeedbackMode::Predicted;
  Vector h0;  // state fed to step 1

  /// Mean-field state entering step t (0-based).
  const Vector& state_before(std::size_t t) const { return t == 0 ? h0 : steps[t - 1].h_mean; }
};

/// Softmax over classes of the negative free energies. Fills every field of
/// the returned activation except `h_mean`.
StepActivation label_posterior(const ModelParams& params, const SparseInput& x,
                               const Vector& h_prev);

/// sigma(W^T x + U^T label_weight + W_hh^T h_prev + c). `label_weight` is
/// either a one-hot of the true class or a posterior.
Vector mean_field_update(const ModelParams& params, const SparseInput& x,
                         const Vector& label_weight, const Vector& h_prev);

struct DecodeResult {
  std::vector<std::size_t> labels;
  ForwardTrace trace;
};

/// Linear-time greedy decoding: the posterior at each step drives the next
/// mean-field state.
DecodeResult decode(const ModelParams& params, std::span<const SparseInput> inputs);

struct ForwardResult {
  double nll = 0.0;
  ForwardTrace trace;
};

/// Teacher-forced pass: the true label's one-hot drives the hidden update.
/// Unscored steps (see SequenceExample::scored) fall back to posterior feedback.
ForwardResult teacher_forced_forward(const ModelParams& params, const SequenceExample& example);

/// Decode-regime pass over a labelled example: posterior feedback, with the
/// NLL of the true labels accumulated along the way.
ForwardResult predicted_forward(const ModelParams& params, const SequenceExample& example);

}  // namespace scrbm
