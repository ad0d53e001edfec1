#include "scrbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scrbm/errors.hpp"

namespace scrbm::oracle {

namespace {

using Real = long double;

// Extended-precision copy of the six SCRBM tensors, flat and row-major:
// w[i*N + j], w_hh[k*N + j], u[y*N + j].
struct WideModel {
  std::size_t m = 0, n = 0, k = 0;
  std::array<std::vector<Real>, 6> t;  // w, w_hh, u, b, c, h_init
  ModelOptions options;

  explicit WideModel(const ModelParams& p)
      : m(p.dims.n_visible), n(p.dims.n_hidden), k(p.dims.n_classes), options(p.options) {
    const auto src = p.tensors();
    for (std::size_t i = 0; i < t.size(); ++i) t[i].assign(src[i].begin(), src[i].end());
  }

  Real w(std::size_t i, std::size_t j) const { return t[0][i * n + j]; }
  Real whh(std::size_t a, std::size_t j) const { return t[1][a * n + j]; }
  Real u(std::size_t y, std::size_t j) const { return t[2][y * n + j]; }
  Real b(std::size_t y) const { return t[3][y]; }
  Real c(std::size_t j) const { return t[4][j]; }
  Real h_init(std::size_t j) const { return t[5][j]; }
};

Real sig(Real z) { return 1.0L / (1.0L + std::exp(-z)); }

Real log1pexp(Real z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Real log_sum_exp(const std::vector<Real>& v) {
  Real top = v[0];
  for (Real a : v) top = std::max(top, a);
  Real s = 0;
  for (Real a : v) s += std::exp(a - top);
  return top + std::log(s);
}

// sum_i x_i W_ij for one hidden unit
Real visible_field(const WideModel& wm, const SparseInput& x, std::size_t j) {
  Real s = 0;
  for (const auto& f : x.active()) {
    if (f.index >= wm.m) throw ContractViolation("input index out of range");
    s += static_cast<Real>(f.value) * wm.w(f.index, j);
  }
  return s;
}

// sum_a h_prev_a W_hh[a][j]
template <typename State>
Real recurrent_field(const WideModel& wm, const State& h_prev, std::size_t j) {
  Real s = 0;
  for (std::size_t a = 0; a < wm.n; ++a) s += static_cast<Real>(h_prev[a]) * wm.whh(a, j);
  return s;
}

void check_hidden_limit(std::size_t n, const OracleLimits& limits) {
  if (n > limits.max_hidden || n >= 63) {
    throw OracleLimitExceeded("hidden enumeration over limit: N=" + std::to_string(n) +
                              " > " + std::to_string(limits.max_hidden));
  }
}

// log sum_h exp(-E(x, y, h; h_prev)) by explicit enumeration.
Real log_partial_sum(const WideModel& wm, const SparseInput& x, std::size_t y,
                     const Vector& h_prev) {
  std::vector<Real> field(wm.n);
  for (std::size_t j = 0; j < wm.n; ++j) {
    field[j] = visible_field(wm, x, j) + wm.u(y, j) + recurrent_field(wm, h_prev, j) + wm.c(j);
  }
  const std::size_t configs = std::size_t{1} << wm.n;
  std::vector<Real> neg_energy(configs);
  for (std::size_t mask = 0; mask < configs; ++mask) {
    Real s = wm.b(y);
    for (std::size_t j = 0; j < wm.n; ++j) {
      if (mask & (std::size_t{1} << j)) s += field[j];
    }
    neg_energy[mask] = s;
  }
  return log_sum_exp(neg_energy);
}

std::vector<Real> posterior_wide(const WideModel& wm, const SparseInput& x, const Vector& h_prev) {
  std::vector<Real> logits(wm.k);
  for (std::size_t y = 0; y < wm.k; ++y) logits[y] = log_partial_sum(wm, x, y, h_prev);
  const Real z = log_sum_exp(logits);
  for (auto& l : logits) l = std::exp(l - z);
  return logits;
}

Real nll_wide(const WideModel& wm, const SequenceExample& ex) {
  std::vector<Real> h_prev(wm.n);
  for (std::size_t j = 0; j < wm.n; ++j) {
    h_prev[j] = wm.options.initial_state == InitialState::Learned ? wm.h_init(j) : sig(wm.c(j));
  }
  const bool recurrent = wm.options.free_energy == FreeEnergyForm::Recurrent;

  Real nll = 0;
  std::vector<Real> visible(wm.n), rec(wm.n), logits(wm.k);
  for (std::size_t t = 0; t < ex.length(); ++t) {
    for (std::size_t j = 0; j < wm.n; ++j) {
      visible[j] = visible_field(wm, ex.inputs[t], j);
      rec[j] = recurrent_field(wm, h_prev, j);
    }
    for (std::size_t y = 0; y < wm.k; ++y) {
      Real s = wm.b(y);
      for (std::size_t j = 0; j < wm.n; ++j) {
        s += log1pexp(visible[j] + wm.u(y, j) + (recurrent ? rec[j] : 0) + wm.c(j));
      }
      logits[y] = s;
    }
    const Real z = log_sum_exp(logits);
    const std::size_t label = ex.labels[t];
    if (label >= wm.k) throw ContractViolation("label out of range");
    nll -= logits[label] - z;
    for (std::size_t j = 0; j < wm.n; ++j) {
      h_prev[j] = sig(visible[j] + wm.u(label, j) + rec[j] + wm.c(j));
    }
  }
  return nll;
}

// ---- RNN ----------------------------------------------------------------

struct WideRnn {
  std::size_t m = 0, n = 0, k = 0;
  std::array<std::vector<Real>, 6> t;  // w_xh, w_hh, w_hy, c, b, h_init

  explicit WideRnn(const RnnParams& p)
      : m(p.dims.n_visible), n(p.dims.n_hidden), k(p.dims.n_classes) {
    const auto src = p.tensors();
    for (std::size_t i = 0; i < t.size(); ++i) t[i].assign(src[i].begin(), src[i].end());
  }
};

Real rnn_nll_wide(const WideRnn& r, const SequenceExample& ex) {
  std::vector<Real> h(r.t[5].begin(), r.t[5].end()), next(r.n), logits(r.k);
  Real nll = 0;
  for (std::size_t t = 0; t < ex.length(); ++t) {
    for (std::size_t j = 0; j < r.n; ++j) {
      Real z = r.t[3][j];
      for (const auto& f : ex.inputs[t].active()) z += static_cast<Real>(f.value) * r.t[0][f.index * r.n + j];
      for (std::size_t a = 0; a < r.n; ++a) z += h[a] * r.t[1][a * r.n + j];
      next[j] = std::tanh(z);
    }
    h = next;
    for (std::size_t y = 0; y < r.k; ++y) {
      Real o = r.t[4][y];
      for (std::size_t j = 0; j < r.n; ++j) o += h[j] * r.t[2][j * r.k + y];
      logits[y] = o;
    }
    nll -= logits[ex.labels[t]] - log_sum_exp(logits);
  }
  return nll;
}

template <typename Wide, typename Grads, typename Nll>
void fill_central_differences(Wide wide, Grads& out, double epsilon, Nll&& nll) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw ContractViolation("finite-difference epsilon must lie in [1e-7, 1e-3]");
  }
  const Real eps = epsilon;
  auto dst = out.tensors();
  for (std::size_t ti = 0; ti < wide.t.size(); ++ti) {
    for (std::size_t i = 0; i < wide.t[ti].size(); ++i) {
      const Real saved = wide.t[ti][i];
      wide.t[ti][i] = saved + eps;
      const Real up = nll(wide);
      wide.t[ti][i] = saved - eps;
      const Real down = nll(wide);
      wide.t[ti][i] = saved;
      dst[ti][i] = static_cast<double>((up - down) / (2 * eps));
    }
  }
}

}  // namespace

double energy(const ModelParams& params, const SparseInput& x, std::size_t y,
              std::span<const int> h, const Vector& h_prev) {
  const WideModel wm(params);
  if (h.size() != wm.n || static_cast<std::size_t>(h_prev.size()) != wm.n || y >= wm.k) {
    throw ContractViolation("oracle energy: shape mismatch");
  }
  Real e = -wm.b(y);
  for (std::size_t j = 0; j < wm.n; ++j) {
    if (h[j] == 0) continue;
    e -= visible_field(wm, x, j) + wm.u(y, j) + recurrent_field(wm, h_prev, j) + wm.c(j);
  }
  return static_cast<double>(e);
}

double brute_force_free_energy(const ModelParams& params, const SparseInput& x, std::size_t y,
                               const Vector& h_prev, const OracleLimits& limits) {
  check_hidden_limit(params.dims.n_hidden, limits);
  const WideModel wm(params);
  if (y >= wm.k) throw ContractViolation("class index out of range");
  return static_cast<double>(-log_partial_sum(wm, x, y, h_prev));
}

Vector brute_force_label_posterior(const ModelParams& params, const SparseInput& x,
                                   const Vector& h_prev, const OracleLimits& limits) {
  check_hidden_limit(params.dims.n_hidden, limits);
  const WideModel wm(params);
  if (static_cast<std::size_t>(h_prev.size()) != wm.n) throw ContractViolation("state length mismatch");
  const auto p = posterior_wide(wm, x, h_prev);
  Vector out(static_cast<Eigen::Index>(wm.k));
  for (std::size_t y = 0; y < wm.k; ++y) out[static_cast<Eigen::Index>(y)] = static_cast<double>(p[y]);
  return out;
}

long double sequence_nll(const ModelParams& params, const SequenceExample& example) {
  return nll_wide(WideModel(params), example);
}

Gradients finite_difference_gradients(const ModelParams& params, const SequenceExample& example,
                                      double epsilon) {
  Gradients out = Gradients::zeros(params.dims);
  fill_central_differences(WideModel(params), out, epsilon,
                           [&](const WideModel& wm) { return nll_wide(wm, example); });
  return out;
}

double central_difference(const std::function<double(double)>& f, double at, double epsilon) {
  return (f(at + epsilon) - f(at - epsilon)) / (2.0 * epsilon);
}

double check_factored_normalization(const ModelParams& params,
                                    std::span<const SparseInput> inputs,
                                    std::span<const Vector> states, const OracleLimits& limits) {
  if (inputs.empty() || inputs.size() != states.size()) {
    throw ContractViolation("need one fixed state per input step");
  }
  const std::size_t k = params.dims.n_classes;
  const std::size_t steps = inputs.size();
  std::size_t total = 1;
  for (std::size_t t = 0; t < steps; ++t) {
    if (total > limits.max_label_sequences / k) {
      throw OracleLimitExceeded("label-sequence enumeration over limit");
    }
    total *= k;
  }

  std::vector<std::vector<Real>> step_post;
  const WideModel wm(params);
  check_hidden_limit(wm.n, limits);
  for (std::size_t t = 0; t < steps; ++t) step_post.push_back(posterior_wide(wm, inputs[t], states[t]));

  // Walk every label sequence as a base-K counter.
  std::vector<std::size_t> digits(steps, 0);
  Real sum = 0;
  for (std::size_t n = 0; n < total; ++n) {
    Real prod = 1;
    for (std::size_t t = 0; t < steps; ++t) prod *= step_post[t][digits[t]];
    sum += prod;
    for (std::size_t t = 0; t < steps; ++t) {
      if (++digits[t] < k) break;
      digits[t] = 0;
    }
  }
  return static_cast<double>(sum);
}

long double rnn_sequence_nll(const RnnParams& params, const SequenceExample& example) {
  return rnn_nll_wide(WideRnn(params), example);
}

RnnGradients rnn_finite_difference_gradients(const RnnParams& params,
                                             const SequenceExample& example, double epsilon) {
  RnnGradients out = RnnParams::zeros(params.dims);
  fill_central_differences(WideRnn(params), out, epsilon,
                           [&](const WideRnn& r) { return rnn_nll_wide(r, example); });
  return out;
}

double max_relative_error(std::span<const std::span<const double>> a,
                          std::span<const std::span<const double>> b) {
  if (a.size() != b.size()) throw ContractViolation("tensor count mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) throw ContractViolation("tensor size mismatch");
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const double denom = std::max({std::abs(a[i][j]), std::abs(b[i][j]), 1e-8});
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]) / denom);
    }
  }
  return worst;
}

ModelDims random_dims(std::mt19937_64& rng, const RandomSpec& spec) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  ModelDims d;
  d.n_visible = pick(1, spec.max_visible);
  d.n_hidden = pick(1, spec.max_hidden);
  d.n_classes = pick(2, spec.max_classes);
  return d;
}

ModelParams random_params(std::mt19937_64& rng, const ModelDims& dims, double scale,
                          ModelOptions options) {
  ModelParams p = ModelParams::zeros(dims, options);
  std::uniform_real_distribution<double> weight(-scale, scale);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto t = p.tensors();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    for (double& v : t[i]) v = weight(rng);
  }
  for (double& v : t.back()) v = unit(rng);
  return p;
}

RnnParams random_rnn_params(std::mt19937_64& rng, const ModelDims& dims, double scale) {
  RnnParams p = RnnParams::zeros(dims);
  std::uniform_real_distribution<double> weight(-scale, scale);
  for (auto t : p.tensors()) {
    for (double& v : t) v = weight(rng);
  }
  return p;
}

SparseInput random_input(std::mt19937_64& rng, std::size_t n_visible) {
  std::bernoulli_distribution on(0.5);
  std::uniform_real_distribution<double> value(0.5, 1.5);
  std::vector<Feature> active;
  for (std::size_t i = 0; i < n_visible; ++i) {
    if (on(rng)) active.push_back({static_cast<std::uint32_t>(i), value(rng)});
  }
  return SparseInput(std::move(active));
}

SequenceExample random_example(std::mt19937_64& rng, const ModelDims& dims, std::size_t length) {
  std::uniform_int_distribution<std::size_t> label(0, dims.n_classes - 1);
  SequenceExample ex;
  for (std::size_t t = 0; t < length; ++t) {
    ex.inputs.push_back(random_input(rng, dims.n_visible));
    ex.labels.push_back(label(rng));
  }
  return ex;
}

}  // namespace scrbm::oracle
