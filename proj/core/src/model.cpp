#include "scrbm/model.hpp"

#include <cmath>
#include <string>

#include "scrbm/errors.hpp"

namespace scrbm {

void ModelDims::validate() const {
  if (n_visible == 0 || n_hidden == 0 || n_classes < 2) {
    throw ContractViolation("model dims need n_visible > 0, n_hidden > 0, n_classes >= 2 (got M=" +
                            std::to_string(n_visible) + ", N=" + std::to_string(n_hidden) +
                            ", K=" + std::to_string(n_classes) + ")");
  }
}

SparseInput::SparseInput(std::vector<Feature> active) : active_(std::move(active)) {
  for (std::size_t i = 1; i < active_.size(); ++i) {
    if (active_[i].index <= active_[i - 1].index) {
      throw ContractViolation("sparse input indices must be strictly increasing");
    }
  }
}

SparseInput SparseInput::one_hot(std::uint32_t index) {
  return SparseInput({Feature{index, 1.0}});
}

SparseInput SparseInput::dense(std::span<const double> values) {
  std::vector<Feature> active;
  active.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    active.push_back({static_cast<std::uint32_t>(i), values[i]});
  }
  return SparseInput(std::move(active));
}

void SparseInput::validate(std::size_t n_visible) const {
  if (!active_.empty() && active_.back().index >= n_visible) {
    throw ContractViolation("sparse input index " + std::to_string(active_.back().index) +
                            " out of range for M=" + std::to_string(n_visible));
  }
}

Vector SparseInput::to_dense(std::size_t n_visible) const {
  validate(n_visible);
  Vector x = Vector::Zero(static_cast<Eigen::Index>(n_visible));
  for (const auto& f : active_) x[f.index] = f.value;
  return x;
}

bool SequenceExample::fully_scored() const {
  for (auto s : scored) {
    if (s == 0) return false;
  }
  return true;
}

void SequenceExample::validate(const ModelDims& dims) const {
  if (inputs.empty()) throw ContractViolation("sequence must have at least one step");
  if (labels.size() != inputs.size()) {
    throw ContractViolation("sequence has " + std::to_string(inputs.size()) + " inputs but " +
                            std::to_string(labels.size()) + " labels");
  }
  if (!scored.empty() && scored.size() != inputs.size()) {
    throw ContractViolation("scoring mask length differs from sequence length");
  }
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    inputs[t].validate(dims.n_visible);
    if (labels[t] >= dims.n_classes) {
      throw ContractViolation("label " + std::to_string(labels[t]) + " at step " +
                              std::to_string(t) + " out of range for K=" +
                              std::to_string(dims.n_classes));
    }
  }
}

std::string_view to_string(InitialState s) {
  return s == InitialState::Learned ? "learned" : "sigmoid-c";
}

std::string_view to_string(FreeEnergyForm f) {
  return f == FreeEnergyForm::Recurrent ? "recurrent" : "printed";
}

InitialState parse_initial_state(std::string_view s) {
  if (s == "learned") return InitialState::Learned;
  if (s == "sigmoid-c") return InitialState::SigmoidBias;
  throw ContractViolation("unknown initial-state mode '" + std::string(s) + "'");
}

FreeEnergyForm parse_free_energy_form(std::string_view s) {
  if (s == "recurrent") return FreeEnergyForm::Recurrent;
  if (s == "printed") return FreeEnergyForm::Printed;
  throw ContractViolation("unknown free-energy form '" + std::string(s) + "'");
}

void ParamBlock::resize_zero(const ModelDims& dims) {
  const auto m = static_cast<Eigen::Index>(dims.n_visible);
  const auto n = static_cast<Eigen::Index>(dims.n_hidden);
  const auto k = static_cast<Eigen::Index>(dims.n_classes);
  w = Matrix::Zero(m, n);
  w_hh = Matrix::Zero(n, n);
  u = Matrix::Zero(k, n);
  b = Vector::Zero(k);
  c = Vector::Zero(n);
  h_init = Vector::Zero(n);
}

namespace {
template <typename T>
std::span<double> span_of(T& t) {
  return {t.data(), static_cast<std::size_t>(t.size())};
}
template <typename T>
std::span<const double> cspan_of(const T& t) {
  return {t.data(), static_cast<std::size_t>(t.size())};
}
}  // namespace

std::array<std::span<double>, 6> ParamBlock::tensors() {
  return {span_of(w), span_of(w_hh), span_of(u), span_of(b), span_of(c), span_of(h_init)};
}

std::array<std::span<const double>, 6> ParamBlock::tensors() const {
  return {cspan_of(w), cspan_of(w_hh), cspan_of(u), cspan_of(b), cspan_of(c), cspan_of(h_init)};
}

bool ParamBlock::all_finite() const {
  for (auto t : tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double ParamBlock::squared_norm() const {
  double s = 0.0;
  for (auto t : tensors()) {
    for (double v : t) s += v * v;
  }
  return s;
}

void ParamBlock::scale(double factor) {
  for (auto t : tensors()) {
    for (double& v : t) v *= factor;
  }
}

void ParamBlock::add_scaled(const ParamBlock& other, double factor) {
  auto dst = tensors();
  auto src = other.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].size() != src[i].size()) throw ContractViolation("tensor shape mismatch");
    for (std::size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += factor * src[i][j];
  }
}

ModelParams ModelParams::zeros(const ModelDims& dims, ModelOptions options) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  p.options = options;
  p.resize_zero(dims);
  p.h_init.setConstant(0.5);
  return p;
}

Vector ModelParams::initial_state() const {
  if (options.initial_state == InitialState::SigmoidBias) {
    return c.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  }
  return h_init;
}

void ModelParams::validate() const {
  dims.validate();
  const auto m = static_cast<Eigen::Index>(dims.n_visible);
  const auto n = static_cast<Eigen::Index>(dims.n_hidden);
  const auto k = static_cast<Eigen::Index>(dims.n_classes);
  if (w.rows() != m || w.cols() != n || w_hh.rows() != n || w_hh.cols() != n ||
      u.rows() != k || u.cols() != n || b.size() != k || c.size() != n || h_init.size() != n) {
    throw ContractViolation("parameter tensor shapes do not match model dims");
  }
  if (!all_finite()) throw ContractViolation("parameters contain non-finite entries");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (h_init[j] < 0.0 || h_init[j] > 1.0) {
      throw ContractViolation("h_init entries must lie in [0, 1]");
    }
  }
}

std::size_t ModelParams::learnable_count() const { return param_count(dims).scrbm; }

Gradients Gradients::zeros(const ModelDims& dims) {
  Gradients g;
  g.resize_zero(dims);
  return g;
}

ParamCount param_count(const ModelDims& dims) {
  dims.validate();
  const std::size_t m = dims.n_visible;
  const std::size_t n = dims.n_hidden;
  const std::size_t k = dims.n_classes;
  ParamCount pc;
  pc.scrbm = m * n + n * n + k * n + k + n;
  pc.rnn_extra = 0;
  pc.gru_extra = 2 * n * (m + n + 1);
  pc.lstm_extra = 3 * n * (m + n + 1);
  pc.initial_state = n;
  return pc;
}

}  // namespace scrbm
