#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <unordered_map>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docleak/grouping.hpp"
#include "docleak/resampling.hpp"
#include "docleak/types.hpp"
#include "json.hpp"

namespace docleak {

struct ExtractedEntity {
  std::string label;
  std::string text;  // normalized
  std::string doc_id;
  friend bool operator==(const ExtractedEntity&, const ExtractedEntity&) = default;
};

struct EvalMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Zero-denominator rules: precision (recall) is 1 when there is neither a
// prediction nor a gold entity, 0 when only its own denominator is empty.
EvalMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

nlohmann::json to_json(const EvalMetrics& m);

// Micro-averaged exact matching on (doc_id, label, text); each gold entity
// absorbs at most one prediction.
EvalMetrics entity_f1(const std::vector<ExtractedEntity>& gold,
                      const std::vector<ExtractedEntity>& pred);

// Every entity of doc with normalized text, in document order.
std::vector<ExtractedEntity> gold_entities(const Document& doc);

// Template signature of a document; nullopt means "no template", which the
// memorizer never indexes.
using Signature = std::function<std::optional<std::string>(const Document&)>;

// "group:<id>" from a grouping. Documents outside it get nullopt.
Signature group_signature(const GroupingResult& groups);
// Business key of a receipt; nullopt for fallback documents.
Signature business_key_signature();

struct MemorizedEntity {
  std::string label;
  std::string text;
};

struct MemorizerModel {
  std::map<std::string, std::vector<MemorizedEntity>> template_index;
  std::map<std::string, std::string> exemplar;  // signature -> source doc_id
  Signature signature;
};

// For each signature, keeps the entities of the doc_id-smallest training
// document that carries it.
MemorizerModel fit_memorizer(const std::vector<Document>& train_docs,
                             Signature signature);

std::vector<ExtractedEntity> predict_memorizer(const MemorizerModel& model,
                                               const Document& doc);

struct SplitEvaluation {
  EvalMetrics metrics;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

// Fits on the manifest's train documents and scores its test documents.
SplitEvaluation evaluate_memorizer(const Corpus& corpus,
                                   const SplitManifest& manifest,
                                   const Signature& signature);

struct GapResult {
  SplitEvaluation leaky;
  SplitEvaluation clean;
  double f1_leaky = 0.0;
  double f1_clean = 0.0;
  double gap = 0.0;
};

nlohmann::json to_json(const GapResult& g);

// Memorizer score on a leaky split against a group-atomic one, using group
// membership as the template signature.
GapResult leakage_gap_experiment(const Corpus& corpus,
                                 const GroupingResult& groups,
                                 const SplitManifest& leaky,
                                 const SplitManifest& clean);

}  // namespace docleak
