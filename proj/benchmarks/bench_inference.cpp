#include <benchmark/benchmark.h>

#include <random>
#include <set>

#include "scrbm/inference.hpp"
#include "scrbm/oracle.hpp"
#include "scrbm/rnn.hpp"
#include "scrbm/training.hpp"

namespace {

using namespace scrbm;

// Sparse inputs with about 20 active features, roughly CoNLL-sized.
SequenceExample sparse_example(std::mt19937_64& rng, const ModelDims& dims, std::size_t length) {
  std::uniform_int_distribution<std::uint32_t> feat(0, static_cast<std::uint32_t>(dims.n_visible - 1));
  std::uniform_int_distribution<std::size_t> label(0, dims.n_classes - 1);
  SequenceExample ex;
  for (std::size_t t = 0; t < length; ++t) {
    std::set<std::uint32_t> idx;
    while (idx.size() < 20) idx.insert(feat(rng));
    std::vector<Feature> active;
    for (auto j : idx) active.push_back({j, 1.0});
    ex.inputs.emplace_back(std::move(active));
    ex.labels.push_back(label(rng));
  }
  return ex;
}

ModelDims dims_for(const benchmark::State& state) {
  return {5000, static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1))};
}

void BM_LabelPosterior(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto dims = dims_for(state);
  const auto p = oracle::random_params(rng, dims, 0.1);
  const auto ex = sparse_example(rng, dims, 1);
  const Vector h_prev = Vector::Constant(static_cast<Eigen::Index>(dims.n_hidden), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(label_posterior(p, ex.inputs[0], h_prev));
}
BENCHMARK(BM_LabelPosterior)->Args({100, 9})->Args({100, 26})->Args({1000, 26})->Args({500, 128});

void BM_Decode(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto dims = dims_for(state);
  const auto p = oracle::random_params(rng, dims, 0.1);
  const auto ex = sparse_example(rng, dims, 30);
  for (auto _ : state) benchmark::DoNotOptimize(decode(p, ex.inputs));
  state.SetItemsProcessed(state.iterations() * 30);
}
BENCHMARK(BM_Decode)->Args({100, 9})->Args({1000, 26});

void BM_SequenceGradients(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto dims = dims_for(state);
  const auto p = oracle::random_params(rng, dims, 0.1);
  const auto ex = sparse_example(rng, dims, 30);
  for (auto _ : state) benchmark::DoNotOptimize(sequence_gradients(p, ex));
  state.SetItemsProcessed(state.iterations() * 30);
}
BENCHMARK(BM_SequenceGradients)->Args({100, 9})->Args({1000, 26});

void BM_RnnGradients(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto dims = dims_for(state);
  const auto p = oracle::random_rnn_params(rng, dims, 0.1);
  const auto ex = sparse_example(rng, dims, 30);
  for (auto _ : state) benchmark::DoNotOptimize(rnn_gradients(p, ex));
  state.SetItemsProcessed(state.iterations() * 30);
}
BENCHMARK(BM_RnnGradients)->Args({100, 9})->Args({1000, 26});

}  // namespace

BENCHMARK_MAIN();
