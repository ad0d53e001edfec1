#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scrbm/data.hpp"
#include "scrbm/inference.hpp"
#include "scrbm/model.hpp"
#include "scrbm/rnn.hpp"

namespace scrbm {

enum class NllRegime { TeacherForced, Predicted };

std::string_view to_string(NllRegime r);

struct EvalReport {
  double sequence_error = 0.0;  // per-sequence error, sequences weighted equally
  double token_error = 0.0;     // pooled over tokens
  double avg_nll_nats = 0.0;    // in `regime`
  double teacher_forced_nll_nats = 0.0;
  double cross_entropy_bits = 0.0;  // NaN unless the task is next-event prediction
  std::size_t n_sequences = 0;
  std::size_t n_tokens = 0;
  NllRegime regime = NllRegime::Predicted;
  std::size_t clamped_probabilities = 0;
};

/// Mean over sequences of each sequence's error rate. Throws
/// ContractViolation on shape mismatch.
double sequence_error(std::span<const std::vector<std::size_t>> preds,
                      std::span<const std::vector<std::size_t>> golds);

/// Mistakes divided by total tokens.
double token_error(std::span<const std::vector<std::size_t>> preds,
                   std::span<const std::vector<std::size_t>> golds);

/// Bits per event over all scored events of a next-event dataset, using
/// teacher-forced evaluation (previous events are observed).
double cross_entropy_bits(const ModelParams& params, const Dataset& testset);

/// Mean per-token NLL in nats: teacher-forced for next-event data, decode
/// regime (posterior feedback) for labelling data.
double avg_nll(const ModelParams& params, const Dataset& dataset);

EvalReport evaluate(const ModelParams& params, const Dataset& dataset);
EvalReport evaluate(const RnnParams& params, const Dataset& dataset);

}  // namespace scrbm
