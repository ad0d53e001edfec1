#include "scrbm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scrbm/errors.hpp"

namespace scrbm {

double softplus(double z) {
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<std::size_t>(i);
  }
  return best;
}

namespace {

void check_state(const ModelParams& params, const Vector& h_prev) {
  if (h_prev.size() != static_cast<Eigen::Index>(params.dims.n_hidden)) {
    throw ContractViolation("previous hidden state has wrong length");
  }
}

// W^T x over the active entries.
Vector visible_drive(const ModelParams& params, const SparseInput& x) {
  x.validate(params.dims.n_visible);
  Vector drive = Vector::Zero(params.w.cols());
  for (const auto& f : x.active()) drive += f.value * params.w.row(f.index).transpose();
  return drive;
}

StepActivation posterior_from_drive(const ModelParams& params, const Vector& drive,
                                    const Vector& h_prev) {
  const auto k = static_cast<Eigen::Index>(params.dims.n_classes);
  StepActivation act;
  act.recurrent_in = params.w_hh.transpose() * h_prev;

  Vector base = drive + params.c;
  if (params.options.free_energy == FreeEnergyForm::Recurrent) base += act.recurrent_in;

  act.preact = params.u.rowwise() + base.transpose();
  act.neg_free_energy.resize(k);
  for (Eigen::Index y = 0; y < k; ++y) {
    double s = params.b[y];
    for (Eigen::Index j = 0; j < act.preact.cols(); ++j) s += softplus(act.preact(y, j));
    act.neg_free_energy[y] = s;
  }

  const double top = act.neg_free_energy.maxCoeff();
  if (!std::isfinite(top)) throw NumericFault("non-finite free energy");
  act.posterior = (act.neg_free_energy.array() - top).exp().matrix();
  act.posterior /= act.posterior.sum();
  return act;
}

Vector mean_field_from_drive(const ModelParams& params, const Vector& drive,
                             const Vector& recurrent_in, const Vector& label_weight) {
  Vector z = drive + params.u.transpose() * label_weight + recurrent_in + params.c;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

Vector one_hot(std::size_t k, std::size_t y) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(k));
  v[static_cast<Eigen::Index>(y)] = 1.0;
  return v;
}

// Shared loop for decoding and both scoring regimes. `labels` may be null.
ForwardTrace run_forward(const ModelParams& params, std::span<const SparseInput> inputs,
                         const SequenceExample* labelled, FeedbackMode mode) {
  if (inputs.empty()) throw ContractViolation("cannot run the model on an empty sequence");

  ForwardTrace trace;
  trace.mode = mode;
  trace.h0 = params.initial_state();
  trace.steps.reserve(inputs.size());
  if (labelled != nullptr) trace.per_step_nll = Vector::Zero(static_cast<Eigen::Index>(inputs.size()));

  const Vector* h_prev = &trace.h0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const Vector drive = visible_drive(params, inputs[t]);
    StepActivation act = posterior_from_drive(params, drive, *h_prev);

    const bool scored = labelled != nullptr && labelled->is_scored(t);
    if (scored) {
      const double p = act.posterior[static_cast<Eigen::Index>(labelled->labels[t])];
      trace.per_step_nll[static_cast<Eigen::Index>(t)] = -std::log(std::max(p, kProbabilityFloor));
    }

    if (mode == FeedbackMode::TeacherForced && scored) {
      act.h_mean = mean_field_from_drive(params, drive, act.recurrent_in,
                                         one_hot(params.dims.n_classes, labelled->labels[t]));
    } else {
      act.h_mean = mean_field_from_drive(params, drive, act.recurrent_in, act.posterior);
    }
    if (!act.h_mean.allFinite()) throw NumericFault("non-finite mean-field state", t);

    trace.steps.push_back(std::move(act));
    h_prev = &trace.steps.back().h_mean;
  }
  return trace;
}

ForwardResult scored_forward(const ModelParams& params, const SequenceExample& example,
                             FeedbackMode mode) {
  example.validate(params.dims);
  ForwardResult out;
  out.trace = run_forward(params, example.inputs, &example, mode);
  out.nll = out.trace.per_step_nll.sum();
  if (!std::isfinite(out.nll)) throw NumericFault("non-finite sequence NLL");
  return out;
}

}  // namespace

double energy(const ModelParams& params, const SparseInput& x, std::size_t y, const Vector& h,
              const Vector& h_prev) {
  check_state(params, h_prev);
  if (y >= params.dims.n_classes) throw ContractViolation("class index out of range");
  if (h.size() != h_prev.size()) throw ContractViolation("hidden configuration has wrong length");
  if (!((h.array() == 0.0) || (h.array() == 1.0)).all()) {
    throw ContractViolation("hidden configuration must be binary");
  }
  const Vector drive = visible_drive(params, x);
  const Vector recurrent_in = params.w_hh.transpose() * h_prev;
  const auto yi = static_cast<Eigen::Index>(y);
  const Vector field = drive + params.u.row(yi).transpose() + recurrent_in + params.c;
  return -field.dot(h) - params.b[yi];
}

double free_energy(const ModelParams& params, const SparseInput& x, std::size_t y,
                   const Vector& h_prev) {
  check_state(params, h_prev);
  if (y >= params.dims.n_classes) throw ContractViolation("class index out of range");
  const StepActivation act = posterior_from_drive(params, visible_drive(params, x), h_prev);
  const double f = -act.neg_free_energy[static_cast<Eigen::Index>(y)];
  if (!std::isfinite(f)) throw NumericFault("non-finite free energy");
  return f;
}

StepActivation label_posterior(const ModelParams& params, const SparseInput& x,
                               const Vector& h_prev) {
  check_state(params, h_prev);
  return posterior_from_drive(params, visible_drive(params, x), h_prev);
}

Vector mean_field_update(const ModelParams& params, const SparseInput& x,
                         const Vector& label_weight, const Vector& h_prev) {
  check_state(params, h_prev);
  if (label_weight.size() != static_cast<Eigen::Index>(params.dims.n_classes)) {
    throw ContractViolation("label weight vector has wrong length");
  }
  if ((label_weight.array() < 0.0).any() || std::abs(label_weight.sum() - 1.0) > 1e-9) {
    throw ContractViolation("label weights must be a probability vector");
  }
  return mean_field_from_drive(params, visible_drive(params, x),
                               params.w_hh.transpose() * h_prev, label_weight);
}

DecodeResult decode(const ModelParams& params, std::span<const SparseInput> inputs) {
  DecodeResult out;
  out.trace = run_forward(params, inputs, nullptr, FeedbackMode::Predicted);
  out.labels.reserve(inputs.size());
  for (const auto& step : out.trace.steps) out.labels.push_back(argmax(step.posterior));
  return out;
}

ForwardResult teacher_forced_forward(const ModelParams& params, const SequenceExample& example) {
  return scored_forward(params, example, FeedbackMode::TeacherForced);
}

ForwardResult predicted_forward(const ModelParams& params, const SequenceExample& example) {
  return scored_forward(params, example, FeedbackMode::Predicted);
}

}  // namespace scrbm
