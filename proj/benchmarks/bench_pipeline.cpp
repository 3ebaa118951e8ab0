#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "embedkit/dataset.hpp"
#include "embedkit/isolation_forest.hpp"
#include "embedkit/lda.hpp"
#include "embedkit/pca.hpp"
#include "embedkit/regression.hpp"
#include "embedkit/rng.hpp"
#include "embedkit/roc.hpp"

namespace {

using namespace embedkit;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
  }
  return m;
}

EmbeddingMatrix labeled_matrix(const Eigen::MatrixXd& m) {
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < m.rows(); ++i) ids.push_back("s" + std::to_string(i));
  return EmbeddingMatrix::from_eigen(ids, m);
}

void BM_FitPca(benchmark::State& state) {
  const EmbeddingMatrix m = labeled_matrix(random_matrix(state.range(0), 256, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_pca(m, 32));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitPca)->Arg(128)->Arg(512)->Arg(1024)->Complexity();

void BM_FitLda(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  Eigen::MatrixXd x = random_matrix(n, 128, 2);
  std::vector<Sample> samples(static_cast<std::size_t>(n));
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) += i % 2 ? 4.0 : -4.0;
    ids[static_cast<std::size_t>(i)] = "s" + std::to_string(i);
    samples[static_cast<std::size_t>(i)] = {ids[static_cast<std::size_t>(i)],
                                            i % 2 ? "b" : "a", {}};
  }
  const EmbeddingMatrix m = EmbeddingMatrix::from_eigen(ids, x);
  const LabeledDataset d(samples);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_lda(m, d));
  }
}
BENCHMARK(BM_FitLda)->Arg(256)->Arg(1024);

void BM_FitForest(benchmark::State& state) {
  const Eigen::MatrixXd pts = random_matrix(512, 50, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(pts, state.range(0), 256, 17));
  }
}
BENCHMARK(BM_FitForest)->Arg(50)->Arg(100)->Arg(200);

void BM_ScoreForest(benchmark::State& state) {
  const Eigen::MatrixXd pts = random_matrix(512, 50, 4);
  const IsolationForestModel model = fit_forest(pts, 100, 256, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score(model, pts));
  }
}
BENCHMARK(BM_ScoreForest);

void BM_RegularizedIncompleteBeta(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    x = x >= 0.9 ? 0.1 : x + 1e-4;
    benchmark::DoNotOptimize(regularized_incomplete_beta(3.5, 21.0, x));
  }
}
BENCHMARK(BM_RegularizedIncompleteBeta);

void BM_Roc(benchmark::State& state) {
  Rng rng(5);
  const int n = static_cast<int>(state.range(0));
  Eigen::VectorXd scores(n);
  std::vector<int> truth(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    scores(i) = rng.next_unit();
    truth[static_cast<std::size_t>(i)] = i % 5 == 0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(roc(scores, truth));
  }
}
BENCHMARK(BM_Roc)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
