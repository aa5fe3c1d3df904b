#include "docleak/evaluation.hpp"

#include <algorithm>
#include <tuple>

#include "docleak/errors.hpp"
#include "docleak/similarity.hpp"

namespace docleak {

using nlohmann::json;

EvalMetrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  const bool nothing = tp + fp == 0 && tp + fn == 0;
  if (tp + fp == 0) {
    m.precision = nothing ? 1.0 : 0.0;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall = nothing ? 1.0 : 0.0;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  const double sum = m.precision + m.recall;
  m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

json to_json(const EvalMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}};
}

EvalMetrics entity_f1(const std::vector<ExtractedEntity>& gold,
                      const std::vector<ExtractedEntity>& pred) {
  // Exact-match greedy assignment reduces to multiset intersection per
  // (doc_id, label, text) key.
  using Key = std::tuple<std::string_view, std::string_view, std::string_view>;
  std::map<Key, std::size_t> unmatched;
  for (const auto& g : gold) ++unmatched[Key{g.doc_id, g.label, g.text}];
  std::size_t tp = 0;
  for (const auto& p : pred) {
    auto it = unmatched.find(Key{p.doc_id, p.label, p.text});
    if (it != unmatched.end() && it->second > 0) {
      --it->second;
      ++tp;
    }
  }
  return metrics_from_counts(tp, pred.size() - tp, gold.size() - tp);
}

std::vector<ExtractedEntity> gold_entities(const Document& doc) {
  std::vector<ExtractedEntity> out;
  out.reserve(doc.entities.size());
  for (const auto& e : doc.entities) {
    out.push_back({e.label, normalize_text(e.text), doc.doc_id});
  }
  return out;
}

Signature group_signature(const GroupingResult& groups) {
  auto membership =
      std::make_shared<const std::unordered_map<std::string, std::size_t>>(
          groups.membership());
  return [membership](const Document& doc) -> std::optional<std::string> {
    auto it = membership->find(doc.doc_id);
    if (it == membership->end()) return std::nullopt;
    return "group:" + std::to_string(it->second);
  };
}

Signature business_key_signature() {
  return [](const Document& doc) -> std::optional<std::string> {
    TemplateKey key = business_key(doc);
    if (key.source == KeySource::fallback_none) return std::nullopt;
    return std::string(to_string(key.source)) + ":" + key.key;
  };
}

MemorizerModel fit_memorizer(const std::vector<Document>& train_docs,
                             Signature signature) {
  std::vector<const Document*> ordered;
  ordered.reserve(train_docs.size());
  for (const auto& d : train_docs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const Document* a, const Document* b) { return a->doc_id < b->doc_id; });

  MemorizerModel model;
  for (const Document* doc : ordered) {
    auto sig = signature(*doc);
    if (!sig || model.template_index.count(*sig)) continue;
    std::vector<MemorizedEntity> stored;
    for (const auto& e : doc->entities) {
      stored.push_back({e.label, normalize_text(e.text)});
    }
    model.template_index.emplace(*sig, std::move(stored));
    model.exemplar.emplace(*sig, doc->doc_id);
  }
  model.signature = std::move(signature);
  return model;
}

std::vector<ExtractedEntity> predict_memorizer(const MemorizerModel& model,
                                               const Document& doc) {
  std::vector<ExtractedEntity> out;
  if (!model.signature) return out;
  auto sig = model.signature(doc);
  if (!sig) return out;
  auto it = model.template_index.find(*sig);
  if (it == model.template_index.end()) return out;
  for (const auto& e : it->second) out.push_back({e.label, e.text, doc.doc_id});
  return out;
}

SplitEvaluation evaluate_memorizer(const Corpus& corpus,
                                   const SplitManifest& manifest,
                                   const Signature& signature) {
  std::vector<Document> train;
  std::vector<const Document*> test;
  for (const auto& doc : corpus.documents) {
    auto it = manifest.assignments.find(doc.doc_id);
    if (it == manifest.assignments.end()) {
      throw Error(ErrorKind::unassigned_document,
                  "document '" + doc.doc_id + "' is missing from the manifest");
    }
    if (it->second == Split::train) train.push_back(doc);
    if (it->second == Split::test) test.push_back(&doc);
  }
  const MemorizerModel model = fit_memorizer(train, signature);

  std::vector<ExtractedEntity> gold;
  std::vector<ExtractedEntity> pred;
  for (const Document* doc : test) {
    auto g = gold_entities(*doc);
    gold.insert(gold.end(), g.begin(), g.end());
    auto p = predict_memorizer(model, *doc);
    pred.insert(pred.end(), p.begin(), p.end());
  }
  return {entity_f1(gold, pred), train.size(), test.size()};
}

json to_json(const GapResult& g) {
  return {{"f1_leaky", g.f1_leaky},
          {"f1_clean", g.f1_clean},
          {"gap", g.gap},
          {"leaky", to_json(g.leaky.metrics)},
          {"clean", to_json(g.clean.metrics)}};
}

GapResult leakage_gap_experiment(const Corpus& corpus,
                                 const GroupingResult& groups,
                                 const SplitManifest& leaky,
                                 const SplitManifest& clean) {
  const Signature signature = group_signature(groups);
  GapResult r;
  r.leaky = evaluate_memorizer(corpus, leaky, signature);
  r.clean = evaluate_memorizer(corpus, clean, signature);
  r.f1_leaky = r.leaky.metrics.f1;
  r.f1_clean = r.clean.metrics.f1;
  r.gap = r.f1_leaky - r.f1_clean;
  return r;
}

}  // namespace docleak
