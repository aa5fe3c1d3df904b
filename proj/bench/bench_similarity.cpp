#include <random>

#include <benchmark/benchmark.h>

#include "docleak/similarity.hpp"
#include "docleak/types.hpp"

namespace {

using namespace docleak;

// Forms drawing 20 words from a small vocabulary, so that blocking yields
// many candidate pairs.
Corpus synthetic_forms(std::size_t n_docs) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> word(0, 399);
  Corpus corpus;
  corpus.dataset = Dataset::funsd;
  for (std::size_t i = 0; i < n_docs; ++i) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(100000 + i);
    doc.dataset = Dataset::funsd;
    doc.origin_split = OriginSplit::train;
    for (int j = 0; j < 20; ++j) {
      const std::string text = "Field " + std::to_string(word(rng)) + ":";
      Token t{text, {0, 20 * j, 100, 20 * j + 10}};
      doc.tokens.push_back(t);
      doc.entities.push_back({j, "question", text, {t}, {}});
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

const Corpus& corpus() {
  static const Corpus c = synthetic_forms(2000);
  return c;
}

void BM_BuildFeatures(benchmark::State& state) {
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_features(corpus(), Metric::shingle, 3, exec));
  }
}
BENCHMARK(BM_BuildFeatures)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ScorePairs(benchmark::State& state) {
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  static const FeatureTable features = build_features(corpus(), Metric::question_overlap);
  static const std::vector<IndexPair> pairs = candidate_index_pairs(features);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_pairs(features, pairs, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_ScorePairs)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
