#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docleak/types.hpp"

namespace docleak {

// NFKC + case folding, punctuation stripped from both ends of every
// whitespace-separated token, whitespace collapsed. Idempotent.
std::string normalize_text(std::string_view raw);

// Sorted, duplicate-free set of normalized question strings.
class QuestionSet {
 public:
  QuestionSet() = default;
  // Normalizes nothing; callers pass already-normalized strings. Empty
  // strings are discarded.
  explicit QuestionSet(std::vector<std::string> questions);

  std::size_t size() const noexcept { return questions_.size(); }
  bool empty() const noexcept { return questions_.empty(); }
  bool contains(std::string_view q) const noexcept;
  const std::vector<std::string>& items() const noexcept { return questions_; }
  auto begin() const noexcept { return questions_.begin(); }
  auto end() const noexcept { return questions_.end(); }

  friend bool operator==(const QuestionSet&, const QuestionSet&) = default;

 private:
  std::vector<std::string> questions_;
};

QuestionSet extract_question_set(const Document& doc);

// |A ∩ B| / max(|A|, |B|); 0 when both sets are empty.
double question_overlap(const QuestionSet& a, const QuestionSet& b) noexcept;

enum class KeySource { company, address, fallback_none };
std::string_view to_string(KeySource s) noexcept;

struct TemplateKey {
  std::string key;
  KeySource source = KeySource::fallback_none;
  friend bool operator==(const TemplateKey&, const TemplateKey&) = default;
};

TemplateKey business_key(const Document& doc);

// Sorted, duplicate-free k-grams over the normalized token texts. A
// document with fewer than k (but at least one) tokens yields one shingle
// made of all of them.
std::vector<std::string> shingle_set(const Document& doc, int k);

// Throws Error(invalid_parameter) when k < 1.
double shingle_jaccard(const Document& a, const Document& b, int k);

enum class Metric { question_overlap, shingle, business_key };
std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view name);

struct SimilarityEdge {
  std::string doc_a;  // doc_a < doc_b
  std::string doc_b;
  double score = 0.0;
  friend bool operator==(const SimilarityEdge&, const SimilarityEdge&) = default;
};

// Index-space view used by the scoring kernels: one sorted key list per
// corpus document (question strings or shingles), aligned with
// corpus.documents.
struct FeatureTable {
  Metric metric = Metric::question_overlap;
  std::vector<std::vector<std::string>> keys;
};

FeatureTable build_features(const Corpus& corpus, Metric metric,
                            int shingle_k = 3,
                            Execution execution = Execution::parallel);

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;  // first < second

// Blocking through an inverted index key -> documents. Emits every pair that
// shares a key, sorted and deduplicated.
std::vector<IndexPair> candidate_index_pairs(const FeatureTable& features);

std::vector<std::pair<std::string, std::string>> candidate_pairs(
    const Corpus& corpus, Metric metric, int shingle_k = 3);

// Scores on the same sorted key lists the blocking uses.
double score_keys(Metric metric, const std::vector<std::string>& a,
                  const std::vector<std::string>& b) noexcept;

// Scores every pair; output[i] belongs to pairs[i] regardless of execution.
std::vector<double> score_pairs(const FeatureTable& features,
                                const std::vector<IndexPair>& pairs,
                                Execution execution = Execution::parallel);

}  // namespace docleak
