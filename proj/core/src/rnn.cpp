#include "scrbm/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "scrbm/errors.hpp"
#include "scrbm/inference.hpp"

namespace scrbm {

RnnParams RnnParams::zeros(const ModelDims& dims) {
  dims.validate();
  const auto m = static_cast<Eigen::Index>(dims.n_visible);
  const auto n = static_cast<Eigen::Index>(dims.n_hidden);
  const auto k = static_cast<Eigen::Index>(dims.n_classes);
  RnnParams p;
  p.dims = dims;
  p.w_xh = Matrix::Zero(m, n);
  p.w_hh = Matrix::Zero(n, n);
  p.w_hy = Matrix::Zero(n, k);
  p.c = Vector::Zero(n);
  p.b = Vector::Zero(k);
  p.h_init = Vector::Zero(n);
  return p;
}

std::array<std::span<double>, 6> RnnParams::tensors() {
  auto sp = [](auto& t) { return std::span<double>(t.data(), static_cast<std::size_t>(t.size())); };
  return {sp(w_xh), sp(w_hh), sp(w_hy), sp(c), sp(b), sp(h_init)};
}

std::array<std::span<const double>, 6> RnnParams::tensors() const {
  auto sp = [](const auto& t) {
    return std::span<const double>(t.data(), static_cast<std::size_t>(t.size()));
  };
  return {sp(w_xh), sp(w_hh), sp(w_hy), sp(c), sp(b), sp(h_init)};
}

bool RnnParams::all_finite() const {
  for (auto t : tensors()) {
    if (!std::all_of(t.begin(), t.end(), [](double v) { return std::isfinite(v); })) return false;
  }
  return true;
}

void RnnParams::validate() const {
  dims.validate();
  const auto m = static_cast<Eigen::Index>(dims.n_visible);
  const auto n = static_cast<Eigen::Index>(dims.n_hidden);
  const auto k = static_cast<Eigen::Index>(dims.n_classes);
  if (w_xh.rows() != m || w_xh.cols() != n || w_hh.rows() != n || w_hh.cols() != n ||
      w_hy.rows() != n || w_hy.cols() != k || c.size() != n || b.size() != k ||
      h_init.size() != n) {
    throw ContractViolation("rnn tensor shapes do not match dims");
  }
  if (!all_finite()) throw ContractViolation("rnn parameters contain non-finite entries");
}

std::size_t RnnParams::learnable_count() const {
  const std::size_t m = dims.n_visible;
  const std::size_t n = dims.n_hidden;
  const std::size_t k = dims.n_classes;
  return m * n + n * n + n * k + n + k;
}

RnnForward rnn_forward(const RnnParams& params, std::span<const SparseInput> inputs) {
  if (inputs.empty()) throw ContractViolation("cannot run the rnn on an empty sequence");
  RnnForward out;
  out.h0 = params.h_init;
  const Vector* prev = &out.h0;
  out.hidden.reserve(inputs.size());
  for (const auto& x : inputs) {
    x.validate(params.dims.n_visible);
    Vector z = params.w_hh.transpose() * *prev + params.c;
    for (const auto& f : x.active()) z += f.value * params.w_xh.row(f.index).transpose();
    out.hidden.push_back(z.array().tanh().matrix());
    prev = &out.hidden.back();

    Vector o = params.w_hy.transpose() * *prev + params.b;
    Vector p = (o.array() - o.maxCoeff()).exp().matrix();
    out.posteriors.push_back(p / p.sum());
  }
  return out;
}

double rnn_nll(const RnnParams& params, const SequenceExample& example) {
  example.validate(params.dims);
  const auto fwd = rnn_forward(params, example.inputs);
  double nll = 0.0;
  for (std::size_t t = 0; t < example.length(); ++t) {
    const double p = fwd.posteriors[t][static_cast<Eigen::Index>(example.labels[t])];
    nll -= std::log(std::max(p, kProbabilityFloor));
  }
  return nll;
}

RnnSequenceGradient rnn_gradients(const RnnParams& params, const SequenceExample& example) {
  example.validate(params.dims);
  if (!example.fully_scored()) throw ContractViolation("gradients need a fully labelled sequence");
  const auto fwd = rnn_forward(params, example.inputs);

  RnnSequenceGradient out;
  out.grads = RnnParams::zeros(params.dims);
  auto& g = out.grads;
  Vector dh = Vector::Zero(params.c.size());
  for (std::size_t ti = example.length(); ti-- > 0;) {
    const auto y = static_cast<Eigen::Index>(example.labels[ti]);
    const Vector& h = fwd.hidden[ti];
    const Vector& h_prev = ti == 0 ? fwd.h0 : fwd.hidden[ti - 1];
    out.nll -= std::log(std::max(fwd.posteriors[ti][y], kProbabilityFloor));

    Vector d_out = fwd.posteriors[ti];
    d_out[y] -= 1.0;
    g.b += d_out;
    g.w_hy.noalias() += h * d_out.transpose();
    dh.noalias() += params.w_hy * d_out;

    const Vector dz = dh.array() * (1.0 - h.array().square());
    g.c += dz;
    for (const auto& f : example.inputs[ti].active()) g.w_xh.row(f.index) += f.value * dz.transpose();
    g.w_hh.noalias() += h_prev * dz.transpose();
    dh = params.w_hh * dz;
    if (!dh.allFinite()) throw NumericFault("non-finite rnn gradient", ti);
  }
  g.h_init = dh;
  if (!g.all_finite()) throw NumericFault("non-finite rnn gradient");
  return out;
}

RnnParams init_rnn_params(const ModelDims& dims, std::uint64_t seed) {
  RnnParams p = RnnParams::zeros(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&](Matrix& m, std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-s, s);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  };
  fill(p.w_xh, dims.n_visible);
  fill(p.w_hh, dims.n_hidden);
  fill(p.w_hy, dims.n_hidden);
  return p;
}

}  // namespace scrbm
