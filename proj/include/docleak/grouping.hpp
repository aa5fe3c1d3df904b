#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "docleak/similarity.hpp"
#include "docleak/types.hpp"
#include "json.hpp"

namespace docleak {

struct TemplateGroup {
  std::size_t group_id = 0;
  std::vector<std::string> members;  // sorted, non-empty
  friend bool operator==(const TemplateGroup&, const TemplateGroup&) = default;
};

// Groups partition the corpus; ids are dense from 0 and follow the order of
// each group's smallest member.
struct GroupingResult {
  std::vector<TemplateGroup> groups;
  double threshold = 0.0;
  Metric metric = Metric::question_overlap;

  std::size_t document_count() const noexcept;
  std::size_t max_group_size() const noexcept;
  // doc_id -> group_id
  std::unordered_map<std::string, std::size_t> membership() const;

  friend bool operator==(const GroupingResult&, const GroupingResult&) = default;
};

nlohmann::json to_json(const GroupingResult& result);
GroupingResult grouping_from_json(const nlohmann::json& j);
// SHA-256 of the canonical JSON serialization.
std::string grouping_digest(const GroupingResult& result);

// Scores within this distance below the threshold count as reaching it, so
// rational scores like 7/10 compare equal to a 0.7 threshold.
inline constexpr double kScoreTolerance = 1e-9;

struct GraphOptions {
  int shingle_k = 3;
  Execution execution = Execution::parallel;
};

// Edges are exactly the candidate pairs whose score >= threshold, sorted by
// (doc_a, doc_b). Throws Error(invalid_parameter) unless 0 < threshold <= 1.
std::vector<SimilarityEdge> build_similarity_graph(const Corpus& corpus,
                                                   Metric metric,
                                                   double threshold,
                                                   const GraphOptions& options = {});

// One group per connected component; every document starts as a singleton.
// Throws Error(unknown_doc_id) when an edge names a document not in corpus.
GroupingResult connected_components(const std::vector<SimilarityEdge>& edges,
                                    const Corpus& corpus);

std::map<std::string, TemplateKey> business_keys(const Corpus& corpus);

// Identical non-fallback keys share a group; fallback documents stay alone.
GroupingResult group_by_key(const Corpus& corpus,
                            const std::map<std::string, TemplateKey>& keys);

// Graph + components for the pairwise metrics, exact keys for business_key.
GroupingResult group_corpus(const Corpus& corpus, Metric metric,
                            double threshold, const GraphOptions& options = {});

using SizeHistogram = std::map<std::size_t, std::size_t>;  // size -> count

SizeHistogram group_size_histogram(const GroupingResult& result);

// Each size goes to the largest anchor not above it; sizes below the first
// anchor go to the first anchor.
SizeHistogram rebin_histogram(const SizeHistogram& histogram,
                              const std::vector<std::size_t>& anchors);

// Bucket anchors visible in the published receipt-group figure.
inline const std::vector<std::size_t> kReceiptFigureAnchors = {
    1, 9, 17, 26, 34, 42, 51, 59, 67, 75};

// "size,count" with a header line.
std::string histogram_csv(const SizeHistogram& histogram);

// Hand-labelled template groups over a subset of the corpus.
struct GroundTruthGrouping {
  std::vector<std::vector<std::string>> groups;

  // Throws Error(invalid_parameter) when a document appears in two groups.
  static GroundTruthGrouping from_groups(std::vector<std::vector<std::string>> groups);
  // Transitive closure over same-template pairs.
  static GroundTruthGrouping from_pairs(
      const std::vector<std::pair<std::string, std::string>>& pairs);
  // Accepts {"groups": [[...], ...]} or {"pairs": [[a, b], ...]}.
  static GroundTruthGrouping from_json(const nlohmann::json& j);
};

struct PairwiseMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Precision/recall over same-group document pairs, restricted to documents
// named by the ground truth. Throws Error(unknown_doc_id) when a ground-truth
// document is absent from the prediction.
PairwiseMetrics pairwise_grouping_metrics(const GroupingResult& predicted,
                                          const GroundTruthGrouping& gt);

struct TuningRow {
  double threshold = 0.0;
  PairwiseMetrics metrics;
};

struct TuningTable {
  std::vector<TuningRow> rows;  // in input order
  std::size_t best = 0;         // argmax F1, ties toward the larger threshold
};

TuningTable tune_threshold(const Corpus& corpus, const GroundTruthGrouping& gt,
                           const std::vector<double>& thresholds,
                           Metric metric = Metric::question_overlap,
                           const GraphOptions& options = {});

std::string tuning_csv(const TuningTable& table);

}  // namespace docleak
