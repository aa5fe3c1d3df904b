#include "docleak/similarity.hpp"

#include <algorithm>
#include <unordered_map>

#include "docleak/errors.hpp"

namespace docleak {

namespace {

std::size_t intersection_size(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) noexcept {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

const Entity* first_with_label(const Document& doc, std::string_view label) {
  for (const auto& e : doc.entities) {
    if (e.label == label) return &e;
  }
  return nullptr;
}

}  // namespace

QuestionSet::QuestionSet(std::vector<std::string> questions)
    : questions_(std::move(questions)) {
  std::erase_if(questions_, [](const std::string& q) { return q.empty(); });
  sort_unique(questions_);
}

bool QuestionSet::contains(std::string_view q) const noexcept {
  return std::binary_search(questions_.begin(), questions_.end(), q);
}

QuestionSet extract_question_set(const Document& doc) {
  std::vector<std::string> qs;
  for (const auto& e : doc.entities) {
    if (e.label == "question") qs.push_back(normalize_text(e.text));
  }
  return QuestionSet(std::move(qs));
}

double question_overlap(const QuestionSet& a, const QuestionSet& b) noexcept {
  return score_keys(Metric::question_overlap, a.items(), b.items());
}

std::string_view to_string(KeySource s) noexcept {
  switch (s) {
    case KeySource::company: return "company";
    case KeySource::address: return "address";
    case KeySource::fallback_none: return "fallback_none";
  }
  return "fallback_none";
}

TemplateKey business_key(const Document& doc) {
  if (const Entity* company = first_with_label(doc, "company")) {
    std::string key = normalize_text(company->text);
    if (!key.empty()) return {std::move(key), KeySource::company};
  }
  if (const Entity* address = first_with_label(doc, "address")) {
    std::string key = normalize_text(address->text);
    if (!key.empty()) return {std::move(key), KeySource::address};
  }
  return {"", KeySource::fallback_none};
}

std::vector<std::string> shingle_set(const Document& doc, int k) {
  if (k < 1) {
    throw Error(ErrorKind::invalid_parameter, "shingle size k must be >= 1");
  }
  std::vector<std::string> words;
  words.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    std::string n = normalize_text(t.text);
    if (!n.empty()) words.push_back(std::move(n));
  }
  std::vector<std::string> shingles;
  if (words.empty()) return shingles;

  const std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(k), words.size());
  shingles.reserve(words.size() - width + 1);
  for (std::size_t i = 0; i + width <= words.size(); ++i) {
    std::string s = words[i];
    for (std::size_t j = 1; j < width; ++j) {
      s.push_back('\x1f');
      s += words[i + j];
    }
    shingles.push_back(std::move(s));
  }
  sort_unique(shingles);
  return shingles;
}

double shingle_jaccard(const Document& a, const Document& b, int k) {
  return score_keys(Metric::shingle, shingle_set(a, k), shingle_set(b, k));
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::question_overlap: return "question_overlap";
    case Metric::shingle: return "shingle";
    case Metric::business_key: return "business_key";
  }
  return "question_overlap";
}

Metric parse_metric(std::string_view name) {
  if (name == "question_overlap") return Metric::question_overlap;
  if (name == "shingle") return Metric::shingle;
  if (name == "business_key") return Metric::business_key;
  throw Error(ErrorKind::invalid_parameter,
              "unknown metric '" + std::string(name) + "'");
}

double score_keys(Metric metric, const std::vector<std::string>& a,
                  const std::vector<std::string>& b) noexcept {
  const std::size_t common = intersection_size(a, b);
  switch (metric) {
    case Metric::question_overlap: {
      const std::size_t denom = std::max(a.size(), b.size());
      if (denom == 0) return 0.0;
      return static_cast<double>(common) / static_cast<double>(denom);
    }
    case Metric::shingle: {
      if (a.empty() && b.empty()) return 1.0;
      if (a.empty() || b.empty()) return 0.0;
      return static_cast<double>(common) /
             static_cast<double>(a.size() + b.size() - common);
    }
    case Metric::business_key:
      return (!a.empty() && a == b) ? 1.0 : 0.0;
  }
  return 0.0;
}

FeatureTable build_features(const Corpus& corpus, Metric metric, int shingle_k,
                            Execution execution) {
  if (metric == Metric::shingle && shingle_k < 1) {
    throw Error(ErrorKind::invalid_parameter, "shingle size k must be >= 1");
  }
  FeatureTable table;
  table.metric = metric;
  table.keys.resize(corpus.documents.size());
  const auto n = static_cast<std::int64_t>(corpus.documents.size());
#pragma omp parallel for schedule(dynamic, 8) if (execution == Execution::parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const Document& doc = corpus.documents[i];
    switch (metric) {
      case Metric::question_overlap:
        table.keys[i] = extract_question_set(doc).items();
        break;
      case Metric::shingle:
        table.keys[i] = shingle_set(doc, shingle_k);
        break;
      case Metric::business_key: {
        TemplateKey key = business_key(doc);
        if (key.source != KeySource::fallback_none) {
          table.keys[i].push_back(std::move(key.key));
        }
        break;
      }
    }
  }
  return table;
}

std::vector<IndexPair> candidate_index_pairs(const FeatureTable& features) {
  std::unordered_map<std::string_view, std::vector<std::uint32_t>> postings;
  for (std::uint32_t d = 0; d < features.keys.size(); ++d) {
    for (const auto& key : features.keys[d]) postings[key].push_back(d);
  }
  std::vector<IndexPair> pairs;
  for (const auto& [key, docs] : postings) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      for (std::size_t j = i + 1; j < docs.size(); ++j) {
        pairs.emplace_back(docs[i], docs[j]);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<std::pair<std::string, std::string>> candidate_pairs(
    const Corpus& corpus, Metric metric, int shingle_k) {
  const FeatureTable features = build_features(corpus, metric, shingle_k);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [a, b] : candidate_index_pairs(features)) {
    out.emplace_back(corpus.documents[a].doc_id, corpus.documents[b].doc_id);
  }
  return out;
}

std::vector<double> score_pairs(const FeatureTable& features,
                                const std::vector<IndexPair>& pairs,
                                Execution execution) {
  std::vector<double> scores(pairs.size());
  const auto n = static_cast<std::int64_t>(pairs.size());
  const Metric metric = features.metric;
  if (execution == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      scores[i] = score_keys(metric, features.keys[pairs[i].first],
                             features.keys[pairs[i].second]);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      scores[i] = score_keys(metric, features.keys[pairs[i].first],
                             features.keys[pairs[i].second]);
    }
  }
  return scores;
}

}  // namespace docleak
