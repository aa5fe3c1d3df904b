#include "docleak/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <set>
#include <sstream>

#include "docleak/digest.hpp"
#include "docleak/errors.hpp"
#include "docleak/rng.hpp"

namespace docleak {

using nlohmann::json;

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw Error(ErrorKind::invalid_parameter, "unknown split '" + std::string(name) + "'");
}

double SplitRatios::of(Split s) const noexcept {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    case Split::test: return test;
  }
  return 0.0;
}

void SplitRatios::validate() const {
  for (Split s : kSplits) {
    const double r = of(s);
    if (!std::isfinite(r) || r < 0.0) {
      throw Error(ErrorKind::invalid_parameter,
                  "ratio for " + std::string(to_string(s)) + " must be >= 0");
    }
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw Error(ErrorKind::invalid_parameter,
                "ratios must sum to 1, got " + format_ratios(*this));
  }
}

SplitRatios default_ratios(double test_fraction) {
  return {0.8 * (1.0 - test_fraction), 0.2 * (1.0 - test_fraction), test_fraction};
}

SplitRatios parse_ratios(std::string_view text) {
  std::vector<double> values;
  bool ok = true;
  for (std::size_t pos = 0; ok;) {
    auto comma = text.find(',', pos);
    std::string_view part = text.substr(
        pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    ok = ec == std::errc{} && ptr == part.data() + part.size();
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (!ok || values.size() != 3) {
    throw Error(ErrorKind::invalid_parameter,
                "ratios must be three numbers 'train,val,test', got '" +
                    std::string(text) + "'");
  }
  SplitRatios r{values[0], values[1], values[2]};
  r.validate();
  return r;
}

std::string format_ratios(const SplitRatios& r) {
  return format_double(r.train) + "," + format_double(r.val) + "," +
         format_double(r.test);
}

std::size_t SplitManifest::count(Split s) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      assignments.begin(), assignments.end(),
      [s](const auto& kv) { return kv.second == s; }));
}

SplitManifest manifest_from_origin(const Corpus& corpus) {
  SplitManifest m;
  for (const auto& doc : corpus.documents) {
    switch (doc.origin_split) {
      case OriginSplit::train: m.assignments[doc.doc_id] = Split::train; break;
      case OriginSplit::test: m.assignments[doc.doc_id] = Split::test; break;
      case OriginSplit::unassigned:
        throw Error(ErrorKind::unassigned_document,
                    "document '" + doc.doc_id + "' has no origin split");
    }
  }
  const double n = static_cast<double>(m.assignments.size());
  if (n > 0) {
    m.ratios = {static_cast<double>(m.count(Split::train)) / n, 0.0,
                static_cast<double>(m.count(Split::test)) / n};
  }
  return m;
}

json to_json(const LeakageReport& r) {
  return {{"n_test", r.n_test},
          {"n_leaked_test", r.n_leaked_test},
          {"leak_fraction", r.leak_fraction},
          {"leaked_doc_ids", r.leaked_doc_ids},
          {"offending_groups", r.offending_groups}};
}

namespace {

LeakageReport leakage_from_assignments(const GroupingResult& groups,
                                       const std::map<std::string, Split>& split_of) {
  LeakageReport report;
  std::set<std::size_t> offending;
  for (const auto& g : groups.groups) {
    bool has_training = false;
    for (const auto& m : g.members) {
      auto it = split_of.find(m);
      if (it == split_of.end()) {
        throw Error(ErrorKind::unassigned_document,
                    "document '" + m + "' has no split assignment");
      }
      if (it->second != Split::test) has_training = true;
    }
    for (const auto& m : g.members) {
      if (split_of.at(m) != Split::test) continue;
      ++report.n_test;
      if (has_training) {
        report.leaked_doc_ids.push_back(m);
        offending.insert(g.group_id);
      }
    }
  }
  std::sort(report.leaked_doc_ids.begin(), report.leaked_doc_ids.end());
  report.n_leaked_test = report.leaked_doc_ids.size();
  report.offending_groups.assign(offending.begin(), offending.end());
  report.leak_fraction =
      report.n_test == 0 ? 0.0
                         : static_cast<double>(report.n_leaked_test) / report.n_test;
  return report;
}

}  // namespace

LeakageReport leakage_report(const GroupingResult& groups, const Corpus& corpus) {
  const auto membership = groups.membership();
  for (const auto& doc : corpus.documents) {
    if (!membership.count(doc.doc_id)) {
      throw Error(ErrorKind::unknown_doc_id,
                  "document '" + doc.doc_id + "' is not in the grouping");
    }
  }
  std::map<std::string, Split> split_of;
  for (const auto& doc : corpus.documents) {
    if (doc.origin_split == OriginSplit::unassigned) {
      throw Error(ErrorKind::unassigned_document,
                  "document '" + doc.doc_id + "' has no origin split");
    }
    split_of[doc.doc_id] =
        doc.origin_split == OriginSplit::train ? Split::train : Split::test;
  }
  return leakage_from_assignments(groups, split_of);
}

LeakageReport leakage_report(const GroupingResult& groups,
                             const SplitManifest& manifest) {
  return leakage_from_assignments(groups, manifest.assignments);
}

SplitManifest resample_splits(const GroupingResult& groups,
                              const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  const std::size_t total = groups.document_count();

  std::vector<const TemplateGroup*> order;
  order.reserve(groups.groups.size());
  for (const auto& g : groups.groups) {
    if (g.members.empty()) continue;
    order.push_back(&g);
  }
  std::sort(order.begin(), order.end(), [](const TemplateGroup* a, const TemplateGroup* b) {
    if (a->members.size() != b->members.size()) {
      return a->members.size() > b->members.size();
    }
    return a->members.front() < b->members.front();
  });

  SplitMix64 rng(seed);
  for (auto run = order.begin(); run != order.end();) {
    auto end = std::find_if(run, order.end(), [&](const TemplateGroup* g) {
      return g->members.size() != (*run)->members.size();
    });
    std::vector<const TemplateGroup*> tie(run, end);
    rng.shuffle(tie);
    std::copy(tie.begin(), tie.end(), run);
    run = end;
  }

  std::array<double, 3> target{};
  for (Split s : kSplits) {
    target[static_cast<int>(s)] = ratios.of(s) * static_cast<double>(total);
  }
  const double largest_target = *std::max_element(target.begin(), target.end());
  if (!order.empty() &&
      static_cast<double>(order.front()->members.size()) > largest_target + 1e-9) {
    throw Error(ErrorKind::infeasible_ratios,
                "group of " + std::to_string(order.front()->members.size()) +
                    " documents exceeds every split's target size");
  }

  constexpr std::array<Split, 3> kTieOrder = {Split::test, Split::val, Split::train};
  std::array<double, 3> assigned{};
  SplitManifest manifest;
  manifest.seed = seed;
  manifest.ratios = ratios;
  for (const TemplateGroup* g : order) {
    Split pick = kTieOrder[0];
    double best = -1e300;
    for (Split s : kTieOrder) {
      const double deficit = target[static_cast<int>(s)] - assigned[static_cast<int>(s)];
      if (deficit > best) {
        best = deficit;
        pick = s;
      }
    }
    assigned[static_cast<int>(pick)] += static_cast<double>(g->members.size());
    for (const auto& m : g->members) manifest.assignments[m] = pick;
  }
  return manifest;
}

namespace {

void pack_groups(const std::vector<std::vector<std::string>>& units,
                 double train_target, double val_target, SplitManifest& fold) {
  double train = 0.0;
  double val = 0.0;
  for (const auto& unit : units) {
    const bool to_train = (train_target - train) >= (val_target - val);
    (to_train ? train : val) += static_cast<double>(unit.size());
    for (const auto& d : unit) fold.assignments[d] = to_train ? Split::train : Split::val;
  }
}

}  // namespace

CvFolds make_cv_folds(const SplitManifest& manifest, int k, double train_fraction,
                      std::uint64_t seed, const FoldOptions& options) {
  if (k < 1) throw Error(ErrorKind::invalid_parameter, "k must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::invalid_parameter, "train fraction must lie in (0, 1)");
  }
  if (options.group_atomic && options.groups == nullptr) {
    throw Error(ErrorKind::invalid_parameter, "group-atomic folds need a grouping");
  }

  std::vector<std::string> pool;
  for (const auto& [doc, split] : manifest.assignments) {
    if (split != Split::test) pool.push_back(doc);
  }
  const double total = static_cast<double>(manifest.assignments.size());
  const double pool_share = total > 0 ? static_cast<double>(pool.size()) / total : 0.0;
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(pool.size())));

  // Group units restricted to the pool, in canonical order.
  std::vector<std::vector<std::string>> units;
  if (options.group_atomic) {
    for (const auto& g : options.groups->groups) {
      std::vector<std::string> unit;
      for (const auto& m : g.members) {
        auto it = manifest.assignments.find(m);
        if (it != manifest.assignments.end() && it->second != Split::test) {
          unit.push_back(m);
        }
      }
      if (!unit.empty()) units.push_back(std::move(unit));
    }
  }

  CvFolds out;
  for (int i = 0; i < k; ++i) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    SplitManifest fold;
    fold.seed = seed;
    fold.ratios = {train_fraction * pool_share, (1.0 - train_fraction) * pool_share,
                   total > 0 ? 1.0 - pool_share : 0.0};
    for (const auto& [doc, split] : manifest.assignments) {
      if (split == Split::test) fold.assignments[doc] = Split::test;
    }
    if (options.group_atomic) {
      auto shuffled = units;
      rng.shuffle(shuffled);
      pack_groups(shuffled, static_cast<double>(n_train),
                  static_cast<double>(pool.size() - n_train), fold);
    } else {
      auto shuffled = pool;
      rng.shuffle(shuffled);
      for (std::size_t j = 0; j < shuffled.size(); ++j) {
        fold.assignments[shuffled[j]] = j < n_train ? Split::train : Split::val;
      }
    }
    out.folds.push_back(std::move(fold));
  }
  return out;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::straddling_group: return "StraddlingGroup";
    case ViolationKind::unassigned_document: return "UnassignedDocument";
    case ViolationKind::unknown_document: return "UnknownDocument";
    case ViolationKind::ratio_deviation: return "RatioDeviation";
  }
  return "Unknown";
}

std::vector<SplitDeviation> ratio_deviation(const SplitManifest& manifest) {
  const double n = static_cast<double>(manifest.assignments.size());
  std::vector<SplitDeviation> out;
  for (Split s : kSplits) {
    SplitDeviation d;
    d.split = s;
    d.target_size = manifest.ratios.of(s) * n;
    d.realized_size = manifest.count(s);
    d.deviation = n > 0 ? std::abs(static_cast<double>(d.realized_size) - d.target_size) / n
                        : 0.0;
    out.push_back(d);
  }
  return out;
}

std::vector<Violation> verify_manifest(const SplitManifest& manifest,
                                       const GroupingResult& groups) {
  std::vector<Violation> out;
  std::set<std::string> grouped;
  for (const auto& g : groups.groups) {
    std::optional<Split> anchor;
    for (const auto& m : g.members) {
      grouped.insert(m);
      auto it = manifest.assignments.find(m);
      if (it == manifest.assignments.end()) {
        out.push_back({ViolationKind::unassigned_document, g.group_id, m,
                       "document has no split assignment"});
        continue;
      }
      if (!anchor || static_cast<int>(it->second) < static_cast<int>(*anchor)) {
        anchor = it->second;
      }
    }
    if (!anchor) continue;
    for (const auto& m : g.members) {
      auto it = manifest.assignments.find(m);
      if (it == manifest.assignments.end() || it->second == *anchor) continue;
      out.push_back({ViolationKind::straddling_group, g.group_id, m,
                     "group " + std::to_string(g.group_id) + " spans " +
                         std::string(to_string(*anchor)) + " and " +
                         std::string(to_string(it->second))});
    }
  }
  for (const auto& [doc, split] : manifest.assignments) {
    if (!grouped.count(doc)) {
      out.push_back({ViolationKind::unknown_document, std::nullopt, doc,
                     "assigned document is not in the grouping"});
    }
  }
  const double bound = static_cast<double>(groups.max_group_size());
  const double n = static_cast<double>(manifest.assignments.size());
  for (const auto& d : ratio_deviation(manifest)) {
    if (d.deviation * n > bound + 1e-9) {
      out.push_back({ViolationKind::ratio_deviation, std::nullopt, "",
                     std::string(to_string(d.split)) + " holds " +
                         std::to_string(d.realized_size) + " documents, target " +
                         format_double(d.target_size)});
    }
  }
  return out;
}

std::string format_manifest(const SplitManifest& manifest,
                            const ManifestHeader& header) {
  std::ostringstream out;
  out << "# docleak split manifest\n";
  out << "# tool_version=" << header.tool_version << '\n';
  out << "# seed=" << manifest.seed << '\n';
  out << "# ratios=" << format_ratios(manifest.ratios) << '\n';
  out << "# metric=" << to_string(header.metric) << '\n';
  out << "# threshold=" << format_double(header.threshold) << '\n';
  out << "# groups_sha256=" << header.groups_digest << '\n';
  if (header.fold) out << "# fold=" << *header.fold << '\n';
  for (const auto& [k, v] : header.extra) out << "# " << k << '=' << v << '\n';
  for (const auto& [doc, split] : manifest.assignments) {
    out << doc << '\t' << to_string(split) << '\n';
  }
  return out.str();
}

SplitManifest parse_manifest(std::string_view text) {
  SplitManifest m;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
      auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      std::string_view key = line.substr(0, eq);
      std::string_view value = line.substr(eq + 1);
      if (key == "seed") {
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), m.seed);
        if (ec != std::errc{}) {
          throw Error(ErrorKind::malformed_annotation, "manifest: bad seed");
        }
      } else if (key == "ratios") {
        m.ratios = parse_ratios(value);
      }
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorKind::malformed_annotation,
                  "manifest line " + std::to_string(line_no) + ": expected doc_id<TAB>split");
    }
    Split split;
    try {
      split = parse_split(line.substr(tab + 1));
    } catch (const Error&) {
      throw Error(ErrorKind::malformed_annotation,
                  "manifest line " + std::to_string(line_no) + ": unknown split");
    }
    if (!m.assignments.emplace(std::string(line.substr(0, tab)), split).second) {
      throw Error(ErrorKind::malformed_annotation,
                  "manifest line " + std::to_string(line_no) + ": duplicate doc_id");
    }
  }
  return m;
}

}  // namespace docleak
