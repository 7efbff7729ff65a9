#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>

#include "emoprobe/probe.hpp"
#include "emoprobe/retrieval.hpp"
#include "emoprobe/rng.hpp"

namespace {

using namespace emoprobe;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Args: input dim, number of events.
void BM_SimilarityMatrix(benchmark::State& state) {
  const auto d = state.range(0);
  const auto n = state.range(1);
  const auto params = init_parameters(static_cast<std::size_t>(d), 256, 0.1, 1);
  const auto labels = random_matrix(6, d, 2);
  const auto events = random_matrix(n, d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(params, labels, events));
  state.SetItemsProcessed(state.iterations() * n * 6);
}
BENCHMARK(BM_SimilarityMatrix)->Args({768, 900})->Args({1024, 900})->Args({768, 10000});

// Args: input dim, batch size.
void BM_SupconGradient(benchmark::State& state) {
  const auto d = state.range(0);
  const auto n = state.range(1);
  const auto params = init_parameters(static_cast<std::size_t>(d), 256, 0.1, 1);
  std::vector<std::size_t> cats(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < cats.size(); ++i) cats[i] = i % 6;
  const auto batch =
      make_batch(random_matrix(6, d, 2), {0, 1, 2, 3, 4, 5}, random_matrix(n, d, 3), cats);
  for (auto _ : state) benchmark::DoNotOptimize(supcon_gradient(params, batch));
}
BENCHMARK(BM_SupconGradient)->Args({16, 64})->Args({768, 64})->Args({768, 256});

void BM_RankEvents(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::Index d = 768;
  const auto params = init_parameters(d, 256, 0.1, 1);
  CandidatePool pool;
  pool.tag = "test";
  pool.embeddings = random_matrix(n, d, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    pool.items.push_back({"e" + std::to_string(i), "joy", false, "text"});
  }
  const Eigen::VectorXd label = random_matrix(d, 1, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rank_events(params, "joy", label, pool));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_RankEvents)->Arg(900)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
