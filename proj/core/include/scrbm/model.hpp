#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace scrbm {

/// Row-major so that a visible unit's outgoing weights are contiguous and
/// checkpoints can store tensors as flat row-major arrays without copies.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct ModelDims {
  std::size_t n_visible = 0;  // M
  std::size_t n_hidden = 0;   // N
  std::size_t n_classes = 0;  // K

  /// Throws ContractViolation unless M, N > 0 and K >= 2.
  void validate() const;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct Feature {
  std::uint32_t index = 0;
  double value = 1.0;

  friend bool operator==(const Feature&, const Feature&) = default;
};

/// A visible vector stored as its active entries, sorted by index.
/// Dense vectors are represented by listing every index.
class SparseInput {
 public:
  SparseInput() = default;
  /// Throws ContractViolation if indices are not strictly increasing.
  explicit SparseInput(std::vector<Feature> active);

  static SparseInput one_hot(std::uint32_t index);
  /// Full index list, zeros included.
  static SparseInput dense(std::span<const double> values);

  const std::vector<Feature>& active() const { return active_; }
  bool empty() const { return active_.empty(); }

  /// Throws ContractViolation if any index is >= n_visible.
  void validate(std::size_t n_visible) const;
  Vector to_dense(std::size_t n_visible) const;

  friend bool operator==(const SparseInput&, const SparseInput&) = default;

 private:
  std::vector<Feature> active_;
};

struct SequenceExample {
  std::vector<SparseInput> inputs;
  std::vector<std::size_t> labels;
  // Optional per-step scoring mask; empty means every step is scored. Steps
  // with mask 0 carry a placeholder label that metrics must ignore.
  std::vector<std::uint8_t> scored;

  std::size_t length() const { return inputs.size(); }
  bool is_scored(std::size_t t) const { return scored.empty() || scored[t] != 0; }
  bool fully_scored() const;

  void validate(const ModelDims& dims) const;

  friend bool operator==(const SequenceExample&, const SequenceExample&) = default;
};

/// How the mean-field state before the first step is obtained.
enum class InitialState {
  Learned,     // separate trainable vector, starts at 0.5
  SigmoidBias  // sigma(c), not trained on its own
};

/// Whether the per-class free energy sees the previous mean-field state.
enum class FreeEnergyForm {
  Recurrent,  // softplus(w_j.x + u_yj + (W_hh^T h_prev)_j + c_j)
  Printed     // same without the recurrent input
};

struct ModelOptions {
  InitialState initial_state = InitialState::Learned;
  FreeEnergyForm free_energy = FreeEnergyForm::Recurrent;

  friend bool operator==(const ModelOptions&, const ModelOptions&) = default;
};

std::string_view to_string(InitialState s);
std::string_view to_string(FreeEnergyForm f);
InitialState parse_initial_state(std::string_view s);
FreeEnergyForm parse_free_energy_form(std::string_view s);

/// The six tensors shared by parameters, gradients and optimizer moments.
struct ParamBlock {
  Matrix w;       // M x N
  Matrix w_hh;    // N x N
  Matrix u;       // K x N, row y is u_y
  Vector b;       // K
  Vector c;       // N
  Vector h_init;  // N

  static constexpr std::array<std::string_view, 6> kTensorNames = {
      "w", "w_hh", "u", "b", "c", "h_init"};

  void resize_zero(const ModelDims& dims);
  std::array<std::span<double>, 6> tensors();
  std::array<std::span<const double>, 6> tensors() const;

  bool all_finite() const;
  double squared_norm() const;
  void scale(double factor);
  void add_scaled(const ParamBlock& other, double factor);
};

struct ModelParams : ParamBlock {
  ModelDims dims;
  ModelOptions options;

  /// All weights and biases zero; h_init = 0.5.
  static ModelParams zeros(const ModelDims& dims, ModelOptions options = {});

  /// The mean-field state fed to step 1.
  Vector initial_state() const;

  /// Shapes match dims, every entry finite, h_init inside [0, 1].
  void validate() const;

  /// Learnable scalars excluding h_init: MN + N^2 + KN + K + N.
  std::size_t learnable_count() const;
};

struct Gradients : ParamBlock {
  static Gradients zeros(const ModelDims& dims);
};

struct ParamCount {
  std::size_t scrbm = 0;
  std::size_t rnn_extra = 0;
  std::size_t gru_extra = 0;   // 2N(M+N+1)
  std::size_t lstm_extra = 0;  // 3N(M+N+1)
  std::size_t initial_state = 0;  // N, reported separately
};

ParamCount param_count(const ModelDims& dims);

}  // namespace scrbm
