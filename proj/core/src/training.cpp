#include "scrbm/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "scrbm/errors.hpp"
#include "scrbm/inference.hpp"

namespace scrbm {

SequenceGradient sequence_gradients(const ModelParams& params, const SequenceExample& example) {
  if (!example.fully_scored()) throw ContractViolation("gradients need a fully labelled sequence");
  const ForwardResult fwd = teacher_forced_forward(params, example);
  const ForwardTrace& trace = fwd.trace;
  const bool recurrent_posterior = params.options.free_energy == FreeEnergyForm::Recurrent;

  SequenceGradient out;
  out.nll = fwd.nll;
  Gradients& g = out.grads;
  g = Gradients::zeros(params.dims);

  // d(NLL of steps after t) / d h_mean^t; zero after the last step.
  Vector dh = Vector::Zero(params.c.size());
  for (std::size_t t = example.length(); t-- > 0;) {
    const StepActivation& act = trace.steps[t];
    const Vector& h_prev = trace.state_before(t);
    const auto y = static_cast<Eigen::Index>(example.labels[t]);

    // d(-log p_y) / d(-F_k) = p_k - [k == y]
    Vector residual = act.posterior;
    residual[y] -= 1.0;
    const Matrix s = act.preact.unaryExpr([](double z) { return sigmoid(z); });
    const Matrix weighted = s.array().colwise() * residual.array();

    g.b += residual;
    g.u += weighted;
    const Vector from_posterior = weighted.colwise().sum().transpose();

    const Vector from_state = dh.array() * act.h_mean.array() * (1.0 - act.h_mean.array());
    g.u.row(y) += from_state.transpose();

    const Vector shared = from_posterior + from_state;
    for (const auto& f : example.inputs[t].active()) g.w.row(f.index) += f.value * shared.transpose();
    g.c += shared;

    const Vector d_recurrent = recurrent_posterior ? shared : from_state;
    g.w_hh.noalias() += h_prev * d_recurrent.transpose();
    dh = params.w_hh * d_recurrent;
    if (!dh.allFinite() || !shared.allFinite()) throw NumericFault("non-finite gradient", t);
  }

  if (params.options.initial_state == InitialState::Learned) {
    g.h_init = dh;
  } else {
    const Vector h0 = trace.h0;
    g.c.array() += dh.array() * h0.array() * (1.0 - h0.array());
  }
  if (!g.all_finite()) throw NumericFault("non-finite gradient", 0);
  return out;
}

SequenceGradient batch_gradients(const ModelParams& params,
                                 std::span<const SequenceExample> batch) {
  if (batch.empty()) throw ContractViolation("empty minibatch");
  SequenceGradient total;
  total.grads = Gradients::zeros(params.dims);
  for (const auto& ex : batch) {
    const SequenceGradient one = sequence_gradients(params, ex);
    total.nll += one.nll;
    total.grads.add_scaled(one.grads, 1.0);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  total.nll *= inv;
  total.grads.scale(inv);
  return total;
}

void TrainConfig::validate() const {
  if (n_hidden == 0) throw ContractViolation("n_hidden must be positive");
  if (!(learning_rate > 0.0)) throw ContractViolation("learning rate must be positive");
  if (batch_size == 0 || max_epochs == 0 || check_every_epochs == 0 || patience_checks == 0) {
    throw ContractViolation("batch size, epochs, check interval and patience must be positive");
  }
  if (!(l2 >= 0.0)) throw ContractViolation("l2 must be non-negative");
  if (grad_clip_norm && !(*grad_clip_norm > 0.0)) {
    throw ContractViolation("gradient clip norm must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 &&
        adam_eps > 0.0)) {
    throw ContractViolation("adam hyperparameters out of range");
  }
}

namespace {

void fill_uniform(Matrix& m, std::size_t fan_in, std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-s, s);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

}  // namespace

ModelParams init_params(const ModelDims& dims, ModelOptions options, std::uint64_t seed) {
  ModelParams p = ModelParams::zeros(dims, options);
  std::mt19937_64 rng(seed);
  fill_uniform(p.w, dims.n_visible, rng);
  fill_uniform(p.w_hh, dims.n_hidden, rng);
  fill_uniform(p.u, dims.n_classes, rng);
  return p;
}

StopDecision early_stopping_check(std::span<const double> series, std::size_t patience) {
  if (patience == 0) throw ContractViolation("patience must be positive");
  if (series.size() <= patience) return StopDecision::Continue;
  const std::size_t window = series.size() - patience;
  double best = *std::min_element(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(window));
  for (std::size_t i = window; i < series.size(); ++i) {
    if (!(series[i] > best)) return StopDecision::Continue;
  }
  return StopDecision::Stop;
}

std::vector<double> TrainHistory::selection_series() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.selection);
  return out;
}

namespace {

// ---- model-specific hooks for the shared loop --------------------------------

struct ScrbmHooks {
  using Params = ModelParams;
  using Grads = Gradients;

  static Params init(const ModelDims& dims, const TrainConfig& cfg) {
    Params p = init_params(dims, cfg.model, cfg.seed);
    if (cfg.freeze_recurrence) p.w_hh.setZero();
    return p;
  }

  static SequenceGradient seq_grad(const Params& p, const SequenceExample& ex) {
    return sequence_gradients(p, ex);
  }

  static Grads zero_grads(const Params& p) { return Gradients::zeros(p.dims); }

  static void regularize(Grads& g, const Params& p, const TrainConfig& cfg) {
    if (cfg.l2 > 0.0) {
      g.w += cfg.l2 * p.w;
      g.w_hh += cfg.l2 * p.w_hh;
      g.u += cfg.l2 * p.u;
    }
    if (cfg.freeze_recurrence) g.w_hh.setZero();
  }

  static void post_step(Params& p, const TrainConfig& cfg) {
    if (cfg.freeze_recurrence) p.w_hh.setZero();
    p.h_init = p.h_init.cwiseMax(0.0).cwiseMin(1.0);
  }

  static EvalReport eval(const Params& p, const Dataset& ds) { return evaluate(p, ds); }
};

struct RnnHooks {
  using Params = RnnParams;
  using Grads = RnnGradients;

  static Params init(const ModelDims& dims, const TrainConfig& cfg) {
    Params p = init_rnn_params(dims, cfg.seed);
    if (cfg.freeze_recurrence) p.w_hh.setZero();
    return p;
  }

  struct Result {
    double nll;
    Grads grads;
  };
  static Result seq_grad(const Params& p, const SequenceExample& ex) {
    auto r = rnn_gradients(p, ex);
    return {r.nll, std::move(r.grads)};
  }

  static Grads zero_grads(const Params& p) { return RnnParams::zeros(p.dims); }

  static void regularize(Grads& g, const Params& p, const TrainConfig& cfg) {
    if (cfg.l2 > 0.0) {
      g.w_xh += cfg.l2 * p.w_xh;
      g.w_hh += cfg.l2 * p.w_hh;
      g.w_hy += cfg.l2 * p.w_hy;
    }
    if (cfg.freeze_recurrence) g.w_hh.setZero();
  }

  static void post_step(Params& p, const TrainConfig& cfg) {
    if (cfg.freeze_recurrence) p.w_hh.setZero();
  }

  static EvalReport eval(const Params& p, const Dataset& ds) { return evaluate(p, ds); }
};

template <typename G>
void accumulate(G& into, const G& from) {
  auto dst = into.tensors();
  auto src = from.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += src[i][j];
  }
}

template <typename G>
void scale_all(G& g, double factor) {
  for (auto t : g.tensors()) {
    for (double& v : t) v *= factor;
  }
}

template <typename G>
double norm_of(const G& g) {
  double s = 0.0;
  for (auto t : g.tensors()) {
    for (double v : t) s += v * v;
  }
  return std::sqrt(s);
}

double selection_metric(const EvalReport& r, TaskKind kind) {
  return kind == TaskKind::NextEvent ? r.cross_entropy_bits : r.sequence_error;
}

template <typename Hooks>
struct LoopResult {
  typename Hooks::Params params;
  TrainHistory history;
};

template <typename Hooks>
LoopResult<Hooks> train_loop(const Dataset& dataset, const Dataset& valid_in,
                             const TrainConfig& cfg, const CheckObserver& observer) {
  cfg.validate();
  if (dataset.empty()) throw ContractViolation("training set is empty");
  dataset.validate();
  const Dataset& valid = valid_in.empty() ? dataset : valid_in;
  if (valid.n_visible != dataset.n_visible || valid.n_classes != dataset.n_classes) {
    throw ContractViolation("training and validation sets disagree on dimensions");
  }
  for (const auto& ex : dataset.examples) {
    if (!ex.fully_scored()) throw ContractViolation("training sequences must be fully labelled");
  }

  const ModelDims dims = dataset.model_dims(cfg.n_hidden);
  typename Hooks::Params params = Hooks::init(dims, cfg);
  typename Hooks::Params best = params;
  Optimizer optimizer(cfg.optimizer, cfg.adam());

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(dataset.examples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_tokens = dataset.n_tokens();

  TrainHistory history;
  double best_selection = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_nll = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      auto grads = Hooks::zero_grads(params);
      for (std::size_t i = start; i < stop; ++i) {
        auto one = Hooks::seq_grad(params, dataset.examples[order[i]]);
        epoch_nll += one.nll;
        accumulate(grads, one.grads);
      }
      scale_all(grads, 1.0 / static_cast<double>(stop - start));
      Hooks::regularize(grads, params, cfg);
      if (cfg.grad_clip_norm) {
        const double norm = norm_of(grads);
        if (norm > *cfg.grad_clip_norm) scale_all(grads, *cfg.grad_clip_norm / norm);
      }
      const auto& cgrads = grads;
      optimizer.apply(params.tensors(), cgrads.tensors());
      Hooks::post_step(params, cfg);
      if (!params.all_finite()) throw NumericFault("parameters became non-finite", epoch);
    }

    const bool check_now = epoch % cfg.check_every_epochs == 0 || epoch == cfg.max_epochs;
    if (!check_now) continue;

    CheckReport report;
    report.epoch = epoch;
    report.valid = Hooks::eval(params, valid);
    if (observer) report.train = Hooks::eval(params, dataset);

    CheckRecord rec;
    rec.epoch = epoch;
    rec.train_nll = epoch_nll / static_cast<double>(n_tokens);
    rec.valid_nll = report.valid.avg_nll_nats;
    rec.valid_error = report.valid.sequence_error;
    rec.valid_cross_entropy = report.valid.cross_entropy_bits;
    rec.selection = selection_metric(report.valid, valid.task_kind);
    history.records.push_back(rec);

    if (rec.selection < best_selection) {
      best_selection = rec.selection;
      history.best_check_index = history.records.size() - 1;
      best = params;
      report.improved = true;
    }
    if (observer) observer(report);

    const auto series = history.selection_series();
    if (early_stopping_check(series, cfg.patience_checks) == StopDecision::Stop) {
      history.stop_reason = StopReason::EarlyStop;
      break;
    }
  }
  return {std::move(best), std::move(history)};
}

}  // namespace

TrainResult train(const Dataset& dataset, const Dataset& valid, const TrainConfig& config,
                  const CheckObserver& observer) {
  auto r = train_loop<ScrbmHooks>(dataset, valid, config, observer);
  return {std::move(r.params), std::move(r.history)};
}

RnnTrainResult train_rnn(const Dataset& dataset, const Dataset& valid, const TrainConfig& config,
                         const CheckObserver& observer) {
  auto r = train_loop<RnnHooks>(dataset, valid, config, observer);
  return {std::move(r.params), std::move(r.history)};
}

}  // namespace scrbm
