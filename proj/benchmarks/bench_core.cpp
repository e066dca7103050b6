#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "affectfuse/common.hpp"
#include "affectfuse/featurize.hpp"
#include "affectfuse/neuralnet.hpp"

namespace {

using namespace affectfuse;

std::vector<std::string> random_texts(std::size_t n, std::uint64_t seed) {
  static const char* words[] = {"good", "bad", "movie", "day", "love", "hate", "really", "not",
                                "great", "awful", "the", "a", "was", "is", "fun", "boring"};
  Rng rng(seed);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t;
    const auto len = 5 + rng.below(25);
    for (std::uint64_t k = 0; k < len; ++k) {
      if (k > 0) t += ' ';
      t += words[rng.below(std::size(words))];
    }
    texts.push_back(std::move(t));
  }
  return texts;
}

std::vector<double> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(rows * cols);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

void BM_TfidfFitTransform(benchmark::State& state) {
  const auto texts = random_texts(static_cast<std::size_t>(state.range(0)), 1);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < texts.size(); ++i) ids.push_back(std::to_string(i));
  for (auto _ : state) {
    const auto model = features::TfidfModel::fit(texts, {1, 2, 3}, 2000);
    benchmark::DoNotOptimize(model.transform(ids, texts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TfidfFitTransform)->Arg(256)->Arg(2048);

void BM_Forward(benchmark::State& state) {
  nn::MLPConfig config;
  config.n_hidden = static_cast<int>(state.range(0));
  config.first_units = 256;
  const auto model = nn::MLPModel::initialized(config, 768);
  const auto x = random_matrix(1, 768, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_Forward)->DenseRange(0, 3);

void BM_TrainEpoch(benchmark::State& state) {
  const std::size_t rows = 1024, cols = 128;
  const auto x = random_matrix(rows, cols, 3);
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) y[i] = x[i * cols] > 0.0 ? 1.0 : 0.0;
  nn::MLPConfig config;
  config.n_hidden = 2;
  config.first_units = 128;
  config.max_epochs = 1;
  const MatrixView view{x, rows, cols};
  for (auto _ : state) benchmark::DoNotOptimize(nn::train(config, view, y, view, y));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_TrainEpoch);

}  // namespace

BENCHMARK_MAIN();
