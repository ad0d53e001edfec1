#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scrbm/errors.hpp"
#include "scrbm/inference.hpp"
#include "scrbm/model.hpp"
#include "scrbm/oracle.hpp"

namespace scrbm {
namespace {

ModelParams tiny_zero(std::size_t m, std::size_t n, std::size_t k) {
  return ModelParams::zeros({m, n, k});
}

Vector constant(std::size_t n, double v) { return Vector::Constant(static_cast<Eigen::Index>(n), v); }

TEST(ModelDims, RejectsZeroAndSingleClass) {
  EXPECT_THROW((ModelDims{0, 1, 2}.validate()), ContractViolation);
  EXPECT_THROW((ModelDims{1, 0, 2}.validate()), ContractViolation);
  EXPECT_THROW((ModelDims{1, 1, 1}.validate()), ContractViolation);
  EXPECT_NO_THROW((ModelDims{1, 1, 2}.validate()));
}

TEST(SparseInput, RequiresStrictlyIncreasingIndices) {
  EXPECT_THROW(SparseInput({{2, 1.0}, {1, 1.0}}), ContractViolation);
  EXPECT_THROW(SparseInput({{1, 1.0}, {1, 1.0}}), ContractViolation);
  const SparseInput x({{0, 1.0}, {3, 2.0}});
  EXPECT_THROW(x.validate(3), ContractViolation);
  EXPECT_NO_THROW(x.validate(4));
  EXPECT_EQ(x.to_dense(4), (Vector(4) << 1.0, 0.0, 0.0, 2.0).finished());
}

TEST(SequenceExample, LengthsMustAgree) {
  SequenceExample ex;
  EXPECT_THROW(ex.validate({2, 1, 2}), ContractViolation);  // T = 0
  ex.inputs = {SparseInput::one_hot(0), SparseInput::one_hot(1)};
  ex.labels = {0};
  EXPECT_THROW(ex.validate({2, 1, 2}), ContractViolation);
  ex.labels = {0, 2};
  EXPECT_THROW(ex.validate({2, 1, 2}), ContractViolation);
  ex.labels = {0, 1};
  EXPECT_NO_THROW(ex.validate({2, 1, 2}));
}

TEST(ModelParams, ZerosAndLearnableCount) {
  const auto p = tiny_zero(3, 4, 2);
  EXPECT_TRUE((p.h_init.array() == 0.5).all());
  EXPECT_EQ(p.learnable_count(), 3u * 4 + 16 + 2 * 4 + 2 + 4);
  auto bad = p;
  bad.h_init[0] = 1.5;
  EXPECT_THROW(bad.validate(), ContractViolation);
  bad = p;
  bad.w(0, 0) = std::nan("");
  EXPECT_THROW(bad.validate(), ContractViolation);
}

TEST(ModelParams, SigmoidBiasInitialState) {
  auto p = ModelParams::zeros({1, 2, 2}, {InitialState::SigmoidBias, FreeEnergyForm::Recurrent});
  p.c << 0.0, 2.0;
  const Vector h0 = p.initial_state();
  EXPECT_DOUBLE_EQ(h0[0], 0.5);
  EXPECT_DOUBLE_EQ(h0[1], 1.0 / (1.0 + std::exp(-2.0)));
}

// ---- energy ---------------------------------------------------------------------

TEST(Energy, ZeroParamsGiveZero) {
  const auto p = tiny_zero(2, 3, 2);
  const Vector h = (Vector(3) << 1, 0, 1).finished();
  EXPECT_EQ(energy(p, SparseInput::one_hot(1), 1, h, constant(3, 0.3)), 0.0);
}

TEST(Energy, OnlyClassBiasSurvives) {
  auto p = tiny_zero(2, 3, 2);
  p.b << 0.7, 0.0;
  for (const Vector h : {Vector(Vector::Zero(3)), Vector(Vector::Ones(3))}) {
    EXPECT_DOUBLE_EQ(energy(p, SparseInput::one_hot(0), 0, h, constant(3, 0.5)), -0.7);
  }
}

TEST(Energy, HandWorkedExample) {
  auto p = tiny_zero(1, 2, 2);
  p.w << 1.0, 2.0;
  p.u.row(0) << 0.5, -0.5;
  p.w_hh.setIdentity();
  p.c << 0.1, 0.1;
  const SparseInput x({{0, 1.0}});
  const Vector h = Vector::Ones(2);
  const Vector h_prev = constant(2, 0.5);
  // unit 0: 1 + 0.5 + 0.5 + 0.1, unit 1: 2 - 0.5 + 0.5 + 0.1
  EXPECT_NEAR(energy(p, x, 0, h, h_prev), -4.2, 1e-12);
  const int hb[] = {1, 1};
  EXPECT_NEAR(oracle::energy(p, x, 0, hb, h_prev), -4.2, 1e-12);
}

TEST(Energy, RejectsNonBinaryHidden) {
  const auto p = tiny_zero(1, 2, 2);
  EXPECT_THROW(energy(p, SparseInput(), 0, constant(2, 0.5), constant(2, 0.5)), ContractViolation);
  EXPECT_THROW(energy(p, SparseInput(), 0, Vector::Zero(3), constant(2, 0.5)), ContractViolation);
}

// ---- free energy ------------------------------------------------------------------

TEST(FreeEnergy, ZeroParams) {
  for (std::size_t n : {1u, 3u, 7u}) {
    const auto p = tiny_zero(2, n, 2);
    EXPECT_NEAR(free_energy(p, SparseInput::one_hot(0), 1, constant(n, 0.5)),
                -static_cast<double>(n) * std::log(2.0), 1e-12);
  }
}

TEST(FreeEnergy, ClassBiasShiftsIt) {
  auto p = tiny_zero(2, 4, 2);
  p.b << 1.0, 0.0;
  EXPECT_NEAR(free_energy(p, SparseInput(), 0, constant(4, 0.5)), -1.0 - 4 * std::log(2.0), 1e-12);
}

TEST(FreeEnergy, MatchesHiddenEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelDims dims{4, 3, 3};
    const auto p = oracle::random_params(rng, dims);
    const auto x = oracle::random_input(rng, dims.n_visible);
    Vector h_prev(3);
    h_prev << 0.2, 0.9, 0.5;
    for (std::size_t y = 0; y < 3; ++y) {
      // Independent sum over the 8 binary states with this file's own loop.
      long double z = 0.0L;
      for (int mask = 0; mask < 8; ++mask) {
        const int h[] = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        z += std::exp(-static_cast<long double>(oracle::energy(p, x, y, h, h_prev)));
      }
      const double f = free_energy(p, x, y, h_prev);
      EXPECT_NEAR(std::exp(-f), static_cast<double>(z), 1e-12 * static_cast<double>(z));
    }
  }
}

TEST(FreeEnergy, PrintedFormDropsRecurrentInput) {
  std::mt19937_64 rng(3);
  auto p = oracle::random_params(rng, {3, 4, 2});
  const auto x = oracle::random_input(rng, 3);
  const Vector h_prev = constant(4, 0.8);
  auto printed = p;
  printed.options.free_energy = FreeEnergyForm::Printed;
  const double with_zero_state = free_energy(p, x, 1, Vector::Zero(4));
  EXPECT_NEAR(free_energy(printed, x, 1, h_prev), with_zero_state, 1e-14);
  EXPECT_GT(std::abs(free_energy(p, x, 1, h_prev) - with_zero_state), 1e-6);
}

TEST(Softplus, StableAtExtremes) {
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_GT(softplus(-800.0), -1.0);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(31.0), 31.0 + std::log1p(std::exp(-31.0)), 1e-14);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

// ---- label posterior -----------------------------------------------------------------

TEST(LabelPosterior, UniformForZeroParams) {
  const auto p = tiny_zero(3, 5, 3);
  const Vector post = label_posterior(p, SparseInput::one_hot(2), constant(5, 0.5)).posterior;
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(post[k], 1.0 / 3.0, 1e-15);
}

TEST(LabelPosterior, ClassBiasSoftmax) {
  auto p = tiny_zero(2, 6, 2);
  p.b << std::log(2.0), 0.0;
  const Vector post = label_posterior(p, SparseInput(), constant(6, 0.5)).posterior;
  EXPECT_NEAR(post[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(post[1], 1.0 / 3.0, 1e-15);
}

TEST(LabelPosterior, FieldsAreConsistent) {
  std::mt19937_64 rng(5);
  const auto p = oracle::random_params(rng, {4, 3, 3});
  const auto x = oracle::random_input(rng, 4);
  const Vector h_prev = constant(3, 0.25);
  const auto act = label_posterior(p, x, h_prev);
  EXPECT_EQ(act.preact.rows(), 3);
  EXPECT_EQ(act.preact.cols(), 3);
  EXPECT_TRUE(act.h_mean.size() == 0);
  for (std::size_t y = 0; y < 3; ++y) {
    EXPECT_NEAR(act.neg_free_energy[static_cast<Eigen::Index>(y)], -free_energy(p, x, y, h_prev),
                1e-12);
  }
  EXPECT_TRUE(act.recurrent_in.isApprox(p.w_hh.transpose() * h_prev, 1e-14));
}

TEST(LabelPosteriorProperty, SumsToOneOverThousandDraws) {
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    oracle::RandomSpec spec;
    spec.max_hidden = 12;
    spec.max_classes = 8;
    const auto dims = oracle::random_dims(rng, spec);
    const auto p = oracle::random_params(rng, dims, 1.0 + 4.0 * unit(rng));
    Vector h_prev(static_cast<Eigen::Index>(dims.n_hidden));
    for (auto& v : h_prev) v = unit(rng);
    const Vector post = label_posterior(p, oracle::random_input(rng, dims.n_visible), h_prev).posterior;
    ASSERT_NEAR(post.sum(), 1.0, 1e-12);
    ASSERT_TRUE((post.array() >= 0.0).all());
  }
}

TEST(LabelPosteriorProperty, ShiftInvariantInClassBias) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    auto p = oracle::random_params(rng, dims);
    const auto x = oracle::random_input(rng, dims.n_visible);
    const Vector h_prev = constant(dims.n_hidden, 0.4);
    const Vector before = label_posterior(p, x, h_prev).posterior;
    p.b.array() += 3.7;
    const Vector after = label_posterior(p, x, h_prev).posterior;
    ASSERT_LT((before - after).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LabelPosteriorProperty, AgreesWithEnumeration) {
  std::mt19937_64 rng(8);
  oracle::RandomSpec spec;
  spec.max_hidden = 10;
  spec.max_classes = 5;
  spec.max_visible = 6;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dims = oracle::random_dims(rng, spec);
    const auto p = oracle::random_params(rng, dims);
    const auto x = oracle::random_input(rng, dims.n_visible);
    const Vector h_prev = constant(dims.n_hidden, 0.6);
    const Vector fast = label_posterior(p, x, h_prev).posterior;
    const Vector exact = oracle::brute_force_label_posterior(p, x, h_prev);
    ASSERT_LT((fast - exact).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SparseDenseProperty, SameResultsEitherWay) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    const auto p = oracle::random_params(rng, dims);
    const auto sparse = oracle::random_input(rng, dims.n_visible);
    const Vector dv = sparse.to_dense(dims.n_visible);
    const auto dense = SparseInput::dense(std::span<const double>(dv.data(), dv.size()));
    const Vector h_prev = constant(dims.n_hidden, 0.3);
    const auto a = label_posterior(p, sparse, h_prev);
    const auto b = label_posterior(p, dense, h_prev);
    ASSERT_LE((a.posterior - b.posterior).cwiseAbs().maxCoeff(), 1e-15);
    ASSERT_LE((a.neg_free_energy - b.neg_free_energy).cwiseAbs().maxCoeff(), 1e-15);
    const Vector ya = mean_field_update(p, sparse, a.posterior, h_prev);
    const Vector yb = mean_field_update(p, dense, a.posterior, h_prev);
    ASSERT_LE((ya - yb).cwiseAbs().maxCoeff(), 1e-15);
    const Vector h = Vector::Ones(static_cast<Eigen::Index>(dims.n_hidden));
    ASSERT_NEAR(energy(p, sparse, 0, h, h_prev), energy(p, dense, 0, h, h_prev), 1e-15 * 100);
  }
}

// ---- mean-field update ------------------------------------------------------------------

TEST(MeanField, ZeroParamsGiveHalf) {
  const auto p = tiny_zero(2, 4, 3);
  const Vector h = mean_field_update(p, SparseInput::one_hot(1), constant(3, 1.0 / 3), constant(4, 0.5));
  EXPECT_TRUE((h.array() == 0.5).all());
}

TEST(MeanField, SaturatesWithLargeNegativeBias) {
  auto p = tiny_zero(2, 4, 2);
  p.c.setConstant(-100.0);
  const Vector h = mean_field_update(p, SparseInput(), constant(2, 0.5), constant(4, 0.5));
  EXPECT_TRUE((h.array() < 1e-40).all());
}

TEST(MeanField, OneHotEqualsConcentratedPosterior) {
  std::mt19937_64 rng(4);
  const auto p = oracle::random_params(rng, {3, 5, 4});
  const auto x = oracle::random_input(rng, 3);
  Vector one_hot = Vector::Zero(4);
  one_hot[2] = 1.0;
  const Vector h_prev = constant(5, 0.1);
  const Vector a = mean_field_update(p, x, one_hot, h_prev);
  // Independent form: sigma(sum of active W rows + u_y + W_hh^T h_prev + c).
  Vector z = p.u.row(2).transpose() + p.w_hh.transpose() * h_prev + p.c;
  for (const auto& f : x.active()) z += f.value * p.w.row(f.index).transpose();
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_NEAR(a[j], 1.0 / (1.0 + std::exp(-z[j])), 1e-15);
}

TEST(MeanField, RejectsNonDistribution) {
  const auto p = tiny_zero(2, 2, 2);
  EXPECT_THROW(mean_field_update(p, SparseInput(), constant(2, 0.7), constant(2, 0.5)), ContractViolation);
  EXPECT_THROW(mean_field_update(p, SparseInput(), (Vector(2) << 1.2, -0.2).finished(), constant(2, 0.5)),
               ContractViolation);
}

// ---- decode -------------------------------------------------------------------------------

std::vector<SparseInput> random_inputs(std::mt19937_64& rng, std::size_t m, std::size_t t) {
  std::vector<SparseInput> xs;
  for (std::size_t i = 0; i < t; ++i) xs.push_back(oracle::random_input(rng, m));
  return xs;
}

TEST(Decode, ZeroParamsPickClassZero) {
  const auto p = tiny_zero(3, 4, 5);
  std::mt19937_64 rng(1);
  const auto xs = random_inputs(rng, 3, 6);
  const auto r = decode(p, xs);
  EXPECT_EQ(r.labels, std::vector<std::size_t>(6, 0));
  EXPECT_EQ(r.trace.mode, FeedbackMode::Predicted);
  for (const auto& s : r.trace.steps) EXPECT_NEAR(s.posterior[4], 0.2, 1e-15);
}

TEST(Decode, EmptyInputRejected) {
  const auto p = tiny_zero(1, 1, 2);
  EXPECT_THROW(decode(p, std::vector<SparseInput>{}), ContractViolation);
}

TEST(Decode, ArgmaxTiesGoLow) {
  EXPECT_EQ(argmax((Vector(3) << 0.2, 0.4, 0.4).finished()), 1u);
  EXPECT_EQ(argmax((Vector(3) << 0.5, 0.5, 0.0).finished()), 0u);
}

TEST(Decode, UsesPosteriorFeedback) {
  std::mt19937_64 rng(9);
  const auto p = oracle::random_params(rng, {3, 4, 3});
  const auto xs = random_inputs(rng, 3, 5);
  const auto r = decode(p, xs);
  Vector h = p.initial_state();
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const Vector post = label_posterior(p, xs[t], h).posterior;
    EXPECT_LT((post - r.trace.steps[t].posterior).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(r.labels[t], argmax(post));
    h = mean_field_update(p, xs[t], post, h);
    EXPECT_LT((h - r.trace.steps[t].h_mean).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(DecodeProperty, NoRecurrenceMeansStepwiseClassifier) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    auto p = oracle::random_params(rng, dims, 3.0);
    p.w_hh.setZero();
    p.u.setZero();
    const auto xs = random_inputs(rng, dims.n_visible, 6);
    const auto labels = decode(p, xs).labels;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      ASSERT_EQ(labels[t], argmax(label_posterior(p, xs[t], p.h_init).posterior));
    }
    std::vector<std::size_t> perm(xs.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<SparseInput> permuted;
    for (auto i : perm) permuted.push_back(xs[i]);
    const auto permuted_labels = decode(p, permuted).labels;
    for (std::size_t t = 0; t < perm.size(); ++t) ASSERT_EQ(permuted_labels[t], labels[perm[t]]);
  }
}

TEST(DecodeProperty, ZeroRecurrentWeightsMakeStepsLocal) {
  // With W_hh = 0 nothing reaches step t from earlier steps, even with U != 0.
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    auto p = oracle::random_params(rng, dims, 3.0);
    p.w_hh.setZero();
    auto xs = random_inputs(rng, dims.n_visible, 5);
    const auto before = decode(p, xs);
    xs[1] = oracle::random_input(rng, dims.n_visible);
    const auto after = decode(p, xs);
    for (std::size_t t : {0u, 2u, 3u, 4u}) {
      ASSERT_EQ(before.labels[t], after.labels[t]);
      ASSERT_LT((before.trace.steps[t].posterior - after.trace.steps[t].posterior).cwiseAbs().maxCoeff(),
                1e-15);
    }
  }
}

TEST(DecodeProperty, RepeatableOnIdenticalInput) {
  std::mt19937_64 rng(41);
  const auto p = oracle::random_params(rng, {4, 6, 3});
  const auto xs = random_inputs(rng, 4, 12);
  const auto a = decode(p, xs).labels;
  for (int i = 0; i < 5; ++i) EXPECT_EQ(decode(p, xs).labels, a);
}

// ---- teacher-forced forward ------------------------------------------------------------------

TEST(TeacherForced, ZeroParamsGiveTLogK) {
  const auto p = tiny_zero(2, 3, 4);
  SequenceExample ex;
  for (std::size_t t = 0; t < 7; ++t) {
    ex.inputs.push_back(SparseInput::one_hot(t % 2));
    ex.labels.push_back(t % 4);
  }
  EXPECT_NEAR(teacher_forced_forward(p, ex).nll, 7 * std::log(4.0), 1e-12);
}

TEST(TeacherForced, SingleStepIsLocalClassifier) {
  std::mt19937_64 rng(2);
  const auto p = oracle::random_params(rng, {3, 4, 3});
  SequenceExample ex;
  ex.inputs = {oracle::random_input(rng, 3)};
  ex.labels = {2};
  const double expected = -std::log(label_posterior(p, ex.inputs[0], p.h_init).posterior[2]);
  EXPECT_NEAR(teacher_forced_forward(p, ex).nll, expected, 1e-14);
}

TEST(TeacherForced, ProductOfEnumeratedFactors) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    const auto p = oracle::random_params(rng, dims);
    const auto ex = oracle::random_example(rng, dims, 5);
    const auto fwd = teacher_forced_forward(p, ex);
    EXPECT_EQ(fwd.trace.mode, FeedbackMode::TeacherForced);
    // Each factor by enumeration over hidden states, conditioned on the
    // states the trace carried (these are fixed values, not functions of y).
    long double log_q = 0.0L;
    for (std::size_t t = 0; t < ex.length(); ++t) {
      const Vector post = oracle::brute_force_label_posterior(p, ex.inputs[t], fwd.trace.state_before(t));
      log_q += std::log(static_cast<long double>(post[static_cast<Eigen::Index>(ex.labels[t])]));
    }
    EXPECT_NEAR(std::exp(-fwd.nll), static_cast<double>(std::exp(log_q)), 1e-10);
    // And the states themselves follow the true-label one-hot.
    Vector h = p.initial_state();
    for (std::size_t t = 0; t < ex.length(); ++t) {
      Vector one_hot = Vector::Zero(static_cast<Eigen::Index>(dims.n_classes));
      one_hot[static_cast<Eigen::Index>(ex.labels[t])] = 1.0;
      h = mean_field_update(p, ex.inputs[t], one_hot, h);
      ASSERT_LT((h - fwd.trace.steps[t].h_mean).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(TeacherForced, LabelOutOfRangeRejected) {
  const auto p = tiny_zero(2, 2, 2);
  SequenceExample ex;
  ex.inputs = {SparseInput::one_hot(0)};
  ex.labels = {2};
  EXPECT_THROW(teacher_forced_forward(p, ex), ContractViolation);
}

TEST(TeacherForced, AgreesWithExtendedPrecisionOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = oracle::random_dims(rng, {});
    ModelOptions opts;
    if (trial % 3 == 1) opts.free_energy = FreeEnergyForm::Printed;
    if (trial % 3 == 2) opts.initial_state = InitialState::SigmoidBias;
    const auto p = oracle::random_params(rng, dims, 1.0, opts);
    const auto ex = oracle::random_example(rng, dims, 6);
    EXPECT_NEAR(teacher_forced_forward(p, ex).nll, static_cast<double>(oracle::sequence_nll(p, ex)),
                1e-11);
  }
}

// ---- param_count ----------------------------------------------------------------------------------

TEST(ParamCount, WorkedExamples) {
  EXPECT_EQ(param_count({128, 100, 26}).scrbm, 25526u);
  EXPECT_EQ(param_count({128, 100, 26}).gru_extra, 45800u);
  EXPECT_EQ(param_count({128, 100, 26}).lstm_extra, 68700u);
  EXPECT_EQ(param_count({1, 1, 2}).scrbm, 7u);
  EXPECT_EQ(param_count({1, 1, 2}).rnn_extra, 0u);
  EXPECT_EQ(param_count({1, 1, 2}).initial_state, 1u);
}

TEST(ParamCount, MatchesTensorSizes) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dims = oracle::random_dims(rng, {9, 9, 9, 1, 1.0});
    const auto p = ModelParams::zeros(dims);
    std::size_t total = 0;
    const auto tensors = p.tensors();
    for (std::size_t i = 0; i + 1 < tensors.size(); ++i) total += tensors[i].size();  // h_init last
    EXPECT_EQ(param_count(dims).scrbm, total);
  }
}

}  // namespace
}  // namespace scrbm
