#include "scrbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scrbm/errors.hpp"
#include "scrbm/inference.hpp"

namespace scrbm {

std::string_view to_string(NllRegime r) {
  return r == NllRegime::TeacherForced ? "teacher_forced" : "predicted";
}

namespace {

void check_shapes(std::span<const std::vector<std::size_t>> preds,
                  std::span<const std::vector<std::size_t>> golds) {
  if (preds.size() != golds.size()) throw ContractViolation("prediction/gold sequence count mismatch");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != golds[i].size()) {
      throw ContractViolation("prediction/gold length mismatch at sequence " + std::to_string(i));
    }
  }
}

// Accumulates errors and log-losses over scored steps only.
struct Tally {
  double seq_error_sum = 0.0;
  std::size_t seq_count = 0;
  std::size_t token_errors = 0;
  std::size_t tokens = 0;
  double nll_main = 0.0;
  double nll_teacher = 0.0;
  std::size_t clamped = 0;

  double neg_log(double p) {
    if (p < kProbabilityFloor) {
      ++clamped;
      p = kProbabilityFloor;
    }
    return -std::log(p);
  }

  void add_sequence(const SequenceExample& ex, const std::vector<std::size_t>& pred) {
    std::size_t errors = 0;
    std::size_t scored = 0;
    for (std::size_t t = 0; t < ex.length(); ++t) {
      if (!ex.is_scored(t)) continue;
      ++scored;
      if (pred[t] != ex.labels[t]) ++errors;
    }
    if (scored == 0) return;
    seq_error_sum += static_cast<double>(errors) / static_cast<double>(scored);
    ++seq_count;
    token_errors += errors;
    tokens += scored;
  }

  EvalReport report(const Dataset& ds, NllRegime regime) const {
    EvalReport r;
    r.n_sequences = ds.examples.size();
    r.n_tokens = tokens;
    r.regime = regime;
    r.clamped_probabilities = clamped;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.sequence_error = seq_count ? seq_error_sum / static_cast<double>(seq_count) : nan;
    r.token_error = tokens ? static_cast<double>(token_errors) / static_cast<double>(tokens) : nan;
    r.avg_nll_nats = tokens ? nll_main / static_cast<double>(tokens) : nan;
    r.teacher_forced_nll_nats = tokens ? nll_teacher / static_cast<double>(tokens) : nan;
    r.cross_entropy_bits = ds.task_kind == TaskKind::NextEvent
                               ? r.teacher_forced_nll_nats / std::numbers::ln2
                               : nan;
    return r;
  }
};

double trace_nll(const ForwardTrace& trace, const SequenceExample& ex, Tally& tally) {
  double s = 0.0;
  for (std::size_t t = 0; t < ex.length(); ++t) {
    if (!ex.is_scored(t)) continue;
    s += tally.neg_log(trace.steps[t].posterior[static_cast<Eigen::Index>(ex.labels[t])]);
  }
  return s;
}

void require_non_empty(const Dataset& ds) {
  if (ds.empty()) throw DataError("cannot evaluate on an empty dataset");
}

}  // namespace

double sequence_error(std::span<const std::vector<std::size_t>> preds,
                      std::span<const std::vector<std::size_t>> golds) {
  check_shapes(preds, golds);
  if (preds.empty()) throw ContractViolation("sequence_error needs at least one sequence");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (golds[i].empty()) throw ContractViolation("empty gold sequence");
    std::size_t errors = 0;
    for (std::size_t j = 0; j < golds[i].size(); ++j) errors += preds[i][j] != golds[i][j];
    total += static_cast<double>(errors) / static_cast<double>(golds[i].size());
  }
  return total / static_cast<double>(preds.size());
}

double token_error(std::span<const std::vector<std::size_t>> preds,
                   std::span<const std::vector<std::size_t>> golds) {
  check_shapes(preds, golds);
  std::size_t errors = 0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < golds[i].size(); ++j) errors += preds[i][j] != golds[i][j];
    tokens += golds[i].size();
  }
  if (tokens == 0) throw ContractViolation("token_error needs at least one token");
  return static_cast<double>(errors) / static_cast<double>(tokens);
}

double cross_entropy_bits(const ModelParams& params, const Dataset& testset) {
  if (testset.task_kind != TaskKind::NextEvent) {
    throw ContractViolation("cross-entropy is defined for next-event datasets only");
  }
  require_non_empty(testset);
  Tally tally;
  for (const auto& ex : testset.examples) {
    const auto fwd = teacher_forced_forward(params, ex);
    tally.nll_teacher += trace_nll(fwd.trace, ex, tally);
    for (std::size_t t = 0; t < ex.length(); ++t) tally.tokens += ex.is_scored(t);
  }
  if (tally.tokens == 0) throw DataError("no scored events in dataset");
  return tally.nll_teacher / static_cast<double>(tally.tokens) / std::numbers::ln2;
}

double avg_nll(const ModelParams& params, const Dataset& dataset) {
  return evaluate(params, dataset).avg_nll_nats;
}

EvalReport evaluate(const ModelParams& params, const Dataset& dataset) {
  require_non_empty(dataset);
  Tally tally;
  const NllRegime regime =
      dataset.task_kind == TaskKind::NextEvent ? NllRegime::TeacherForced : NllRegime::Predicted;
  for (const auto& ex : dataset.examples) {
    ex.validate(params.dims);
    const auto decoded = decode(params, ex.inputs);
    const double predicted = trace_nll(decoded.trace, ex, tally);
    const auto forced = teacher_forced_forward(params, ex);
    const double teacher = trace_nll(forced.trace, ex, tally);
    tally.nll_teacher += teacher;
    tally.nll_main += regime == NllRegime::TeacherForced ? teacher : predicted;
    tally.add_sequence(ex, decoded.labels);
  }
  return tally.report(dataset, regime);
}

EvalReport evaluate(const RnnParams& params, const Dataset& dataset) {
  require_non_empty(dataset);
  Tally tally;
  for (const auto& ex : dataset.examples) {
    ex.validate(params.dims);
    const auto fwd = rnn_forward(params, ex.inputs);
    std::vector<std::size_t> pred;
    double nll = 0.0;
    for (std::size_t t = 0; t < ex.length(); ++t) {
      pred.push_back(argmax(fwd.posteriors[t]));
      if (ex.is_scored(t)) {
        nll += tally.neg_log(fwd.posteriors[t][static_cast<Eigen::Index>(ex.labels[t])]);
      }
    }
    tally.nll_main += nll;
    tally.nll_teacher += nll;
    tally.add_sequence(ex, pred);
  }
  // Labels never feed back into an RNN, so both regimes coincide.
  const NllRegime regime =
      dataset.task_kind == TaskKind::NextEvent ? NllRegime::TeacherForced : NllRegime::Predicted;
  return tally.report(dataset, regime);
}

}  // namespace scrbm
