#include "docleak/grouping.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "docleak/corpus.hpp"
#include "docleak/digest.hpp"
#include "docleak/errors.hpp"
#include "docleak/union_find.hpp"

namespace docleak {

using nlohmann::json;

namespace {

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::invalid_parameter,
                "threshold must lie in (0, 1], got " + format_double(threshold));
  }
}

// Sorts members and groups, then assigns dense ids.
GroupingResult finalize(std::vector<std::vector<std::string>> buckets) {
  std::erase_if(buckets, [](const auto& b) { return b.empty(); });
  for (auto& b : buckets) std::sort(b.begin(), b.end());
  std::sort(buckets.begin(), buckets.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  GroupingResult result;
  result.groups.reserve(buckets.size());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    result.groups.push_back({i, std::move(buckets[i])});
  }
  return result;
}

std::vector<SimilarityEdge> edges_at(const Corpus& corpus,
                                     const std::vector<IndexPair>& pairs,
                                     const std::vector<double>& scores,
                                     double threshold) {
  std::vector<SimilarityEdge> edges;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (scores[i] >= threshold - kScoreTolerance) {
      edges.push_back({corpus.documents[pairs[i].first].doc_id,
                       corpus.documents[pairs[i].second].doc_id, scores[i]});
    }
  }
  return edges;
}

}  // namespace

std::size_t GroupingResult::document_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

std::size_t GroupingResult::max_group_size() const noexcept {
  std::size_t m = 0;
  for (const auto& g : groups) m = std::max(m, g.members.size());
  return m;
}

std::unordered_map<std::string, std::size_t> GroupingResult::membership() const {
  std::unordered_map<std::string, std::size_t> out;
  out.reserve(document_count());
  for (const auto& g : groups) {
    for (const auto& m : g.members) out.emplace(m, g.group_id);
  }
  return out;
}

json to_json(const GroupingResult& result) {
  json groups = json::array();
  for (const auto& g : result.groups) {
    groups.push_back({{"group_id", g.group_id}, {"members", g.members}});
  }
  return {{"metric", to_string(result.metric)},
          {"threshold", result.threshold},
          {"groups", std::move(groups)}};
}

GroupingResult grouping_from_json(const json& j) {
  try {
    GroupingResult result;
    result.metric = parse_metric(j.at("metric").get<std::string>());
    result.threshold = j.at("threshold").get<double>();
    for (const auto& g : j.at("groups")) {
      result.groups.push_back({g.at("group_id").get<std::size_t>(),
                               g.at("members").get<std::vector<std::string>>()});
    }
    return result;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_annotation,
                std::string("grouping JSON: ") + e.what());
  }
}

std::string grouping_digest(const GroupingResult& result) {
  return sha256_hex(dump_json(to_json(result)));
}

std::vector<SimilarityEdge> build_similarity_graph(const Corpus& corpus,
                                                   Metric metric,
                                                   double threshold,
                                                   const GraphOptions& options) {
  check_threshold(threshold);
  const FeatureTable features =
      build_features(corpus, metric, options.shingle_k, options.execution);
  const auto pairs = candidate_index_pairs(features);
  const auto scores = score_pairs(features, pairs, options.execution);
  return edges_at(corpus, pairs, scores, threshold);
}

GroupingResult connected_components(const std::vector<SimilarityEdge>& edges,
                                    const Corpus& corpus) {
  UnionFind uf(corpus.documents.size());
  auto index_of = [&](const std::string& id) {
    const Document* d = corpus.find(id);
    if (d == nullptr) {
      throw Error(ErrorKind::unknown_doc_id, "edge endpoint '" + id + "' not in corpus");
    }
    return static_cast<std::size_t>(d - corpus.documents.data());
  };
  for (const auto& e : edges) uf.unite(index_of(e.doc_a), index_of(e.doc_b));

  std::vector<std::vector<std::string>> buckets(corpus.documents.size());
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    buckets[uf.find(i)].push_back(corpus.documents[i].doc_id);
  }
  return finalize(std::move(buckets));
}

std::map<std::string, TemplateKey> business_keys(const Corpus& corpus) {
  std::map<std::string, TemplateKey> keys;
  for (const auto& doc : corpus.documents) keys.emplace(doc.doc_id, business_key(doc));
  return keys;
}

GroupingResult group_by_key(const Corpus& corpus,
                            const std::map<std::string, TemplateKey>& keys) {
  std::map<std::string, std::vector<std::string>> by_key;
  std::vector<std::vector<std::string>> buckets;
  for (const auto& doc : corpus.documents) {
    auto it = keys.find(doc.doc_id);
    if (it == keys.end()) {
      throw Error(ErrorKind::invalid_parameter,
                  "no template key for document '" + doc.doc_id + "'");
    }
    if (it->second.source == KeySource::fallback_none) {
      buckets.push_back({doc.doc_id});
    } else {
      by_key[it->second.key].push_back(doc.doc_id);
    }
  }
  for (auto& [key, members] : by_key) buckets.push_back(std::move(members));
  GroupingResult result = finalize(std::move(buckets));
  result.metric = Metric::business_key;
  result.threshold = 1.0;
  return result;
}

GroupingResult group_corpus(const Corpus& corpus, Metric metric,
                            double threshold, const GraphOptions& options) {
  check_threshold(threshold);
  GroupingResult result;
  if (metric == Metric::business_key) {
    result = group_by_key(corpus, business_keys(corpus));
  } else {
    result = connected_components(
        build_similarity_graph(corpus, metric, threshold, options), corpus);
  }
  result.metric = metric;
  result.threshold = threshold;
  return result;
}

SizeHistogram group_size_histogram(const GroupingResult& result) {
  SizeHistogram h;
  for (const auto& g : result.groups) ++h[g.members.size()];
  return h;
}

SizeHistogram rebin_histogram(const SizeHistogram& histogram,
                              const std::vector<std::size_t>& anchors) {
  SizeHistogram out;
  if (anchors.empty()) return histogram;
  for (std::size_t a : anchors) out[a] = 0;
  for (const auto& [size, count] : histogram) {
    auto it = std::upper_bound(anchors.begin(), anchors.end(), size);
    std::size_t anchor = it == anchors.begin() ? anchors.front() : *std::prev(it);
    out[anchor] += count;
  }
  return out;
}

std::string histogram_csv(const SizeHistogram& histogram) {
  std::ostringstream out;
  out << "size,count\n";
  for (const auto& [size, count] : histogram) out << size << ',' << count << '\n';
  return out.str();
}

GroundTruthGrouping GroundTruthGrouping::from_groups(
    std::vector<std::vector<std::string>> groups) {
  std::unordered_set<std::string> seen;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    for (const auto& d : g) {
      if (!seen.insert(d).second) {
        throw Error(ErrorKind::invalid_parameter,
                    "ground truth lists '" + d + "' in more than one group");
      }
    }
  }
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return GroundTruthGrouping{std::move(groups)};
}

GroundTruthGrouping GroundTruthGrouping::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::string> ids;
  for (const auto& [a, b] : pairs) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(
        std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  UnionFind uf(ids.size());
  for (const auto& [a, b] : pairs) uf.unite(index_of(a), index_of(b));
  std::vector<std::vector<std::string>> buckets(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) buckets[uf.find(i)].push_back(ids[i]);
  std::erase_if(buckets, [](const auto& b) { return b.empty(); });
  return from_groups(std::move(buckets));
}

GroundTruthGrouping GroundTruthGrouping::from_json(const json& j) {
  try {
    if (j.contains("groups")) {
      return from_groups(j.at("groups").get<std::vector<std::vector<std::string>>>());
    }
    if (j.contains("pairs")) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& p : j.at("pairs")) {
        pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      }
      return from_pairs(pairs);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::malformed_annotation,
                std::string("ground truth JSON: ") + e.what());
  }
  throw Error(ErrorKind::malformed_annotation,
              "ground truth JSON needs a \"groups\" or \"pairs\" key");
}

PairwiseMetrics pairwise_grouping_metrics(const GroupingResult& predicted,
                                          const GroundTruthGrouping& gt) {
  const auto membership = predicted.membership();

  // Predicted group of every ground-truth document, in one flat list.
  struct Labelled {
    std::size_t gt_group;
    std::size_t pred_group;
  };
  std::vector<Labelled> docs;
  for (std::size_t g = 0; g < gt.groups.size(); ++g) {
    for (const auto& d : gt.groups[g]) {
      auto it = membership.find(d);
      if (it == membership.end()) {
        throw Error(ErrorKind::unknown_doc_id,
                    "ground-truth document '" + d + "' not in grouping");
      }
      docs.push_back({g, it->second});
    }
  }

  // Pair counts from contingency cells: same-gt pairs, same-pred pairs, both.
  auto pairs_in = [](std::size_t n) { return n * (n - 1) / 2; };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
  std::map<std::size_t, std::size_t> gt_sizes;
  std::map<std::size_t, std::size_t> pred_sizes;
  for (const auto& d : docs) {
    ++cells[{d.gt_group, d.pred_group}];
    ++gt_sizes[d.gt_group];
    ++pred_sizes[d.pred_group];
  }
  std::size_t both = 0, gt_pairs = 0, pred_pairs = 0;
  for (const auto& [k, n] : cells) both += pairs_in(n);
  for (const auto& [k, n] : gt_sizes) gt_pairs += pairs_in(n);
  for (const auto& [k, n] : pred_sizes) pred_pairs += pairs_in(n);

  PairwiseMetrics m;
  m.tp = both;
  m.fp = pred_pairs - both;
  m.fn = gt_pairs - both;
  if (pred_pairs == 0 && gt_pairs == 0) {
    m.precision = m.recall = m.f1 = 1.0;
    return m;
  }
  m.precision = pred_pairs == 0 ? 0.0 : static_cast<double>(both) / pred_pairs;
  m.recall = gt_pairs == 0 ? 0.0 : static_cast<double>(both) / gt_pairs;
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

TuningTable tune_threshold(const Corpus& corpus, const GroundTruthGrouping& gt,
                           const std::vector<double>& thresholds, Metric metric,
                           const GraphOptions& options) {
  if (thresholds.empty()) {
    throw Error(ErrorKind::invalid_parameter, "threshold list is empty");
  }
  for (double t : thresholds) check_threshold(t);

  // Scores do not depend on the threshold; compute them once.
  const FeatureTable features =
      build_features(corpus, metric, options.shingle_k, options.execution);
  const auto pairs = candidate_index_pairs(features);
  const auto scores = score_pairs(features, pairs, options.execution);

  TuningTable table;
  for (double t : thresholds) {
    GroupingResult grouping;
    if (metric == Metric::business_key) {
      grouping = group_by_key(corpus, business_keys(corpus));
    } else {
      grouping = connected_components(edges_at(corpus, pairs, scores, t), corpus);
    }
    table.rows.push_back({t, pairwise_grouping_metrics(grouping, gt)});
  }
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& cand = table.rows[i];
    const auto& best = table.rows[table.best];
    if (cand.metrics.f1 > best.metrics.f1 ||
        (cand.metrics.f1 == best.metrics.f1 && cand.threshold > best.threshold)) {
      table.best = i;
    }
  }
  return table;
}

std::string tuning_csv(const TuningTable& table) {
  std::ostringstream out;
  out << "threshold,precision,recall,f1,best\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    out << format_double(r.threshold) << ',' << format_double(r.metrics.precision)
        << ',' << format_double(r.metrics.recall) << ','
        << format_double(r.metrics.f1) << ',' << (i == table.best ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace docleak
