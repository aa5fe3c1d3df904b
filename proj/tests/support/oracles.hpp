#pragma once

// Brute-force reference computations. None of these call into the code
// paths they are used to check (no UnionFind, no inverted index, no
// contingency counting, no multiset shortcut).

#include <algorithm>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docleak/evaluation.hpp"
#include "docleak/grouping.hpp"

namespace docleak::testing {

inline double brute_overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  const std::size_t denom = std::max(a.size(), b.size());
  return denom == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(denom);
}

inline double brute_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> uni = a;
  uni.insert(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  if (uni.empty()) return 1.0;
  return static_cast<double>(common) / static_cast<double>(uni.size());
}

// Reachability closure by repeated relaxation over an adjacency matrix.
inline std::set<std::set<int>> brute_components(int n,
                                                const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) reach[i][i] = 1;
  for (auto [a, b] : edges) reach[a][b] = reach[b][a] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach[i][k])
        for (int j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  std::set<std::set<int>> out;
  for (int i = 0; i < n; ++i) {
    std::set<int> comp;
    for (int j = 0; j < n; ++j)
      if (reach[i][j]) comp.insert(j);
    out.insert(comp);
  }
  return out;
}

inline std::set<std::set<std::string>> as_sets(const GroupingResult& g) {
  std::set<std::set<std::string>> out;
  for (const auto& grp : g.groups) out.insert({grp.members.begin(), grp.members.end()});
  return out;
}

// Every group of fine lies inside one group of coarse.
inline bool refines(const GroupingResult& fine, const GroupingResult& coarse) {
  for (const auto& f : fine.groups) {
    bool inside = false;
    for (const auto& c : coarse.groups) {
      if (std::includes(c.members.begin(), c.members.end(), f.members.begin(),
                        f.members.end())) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
  }
  return true;
}

struct PairCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Enumerates every unordered pair of ground-truth documents.
inline PairCounts brute_pair_counts(const GroupingResult& predicted,
                                    const std::vector<std::vector<std::string>>& gt_groups) {
  std::vector<std::pair<std::string, std::size_t>> docs;
  for (std::size_t g = 0; g < gt_groups.size(); ++g)
    for (const auto& d : gt_groups[g]) docs.emplace_back(d, g);
  auto pred_group = [&](const std::string& d) {
    for (const auto& grp : predicted.groups)
      if (std::find(grp.members.begin(), grp.members.end(), d) != grp.members.end())
        return grp.group_id;
    return static_cast<std::size_t>(-1);
  };
  PairCounts c;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      const bool same_gt = docs[i].second == docs[j].second;
      const bool same_pred = pred_group(docs[i].first) == pred_group(docs[j].first);
      if (same_gt && same_pred) ++c.tp;
      if (!same_gt && same_pred) ++c.fp;
      if (same_gt && !same_pred) ++c.fn;
    }
  }
  return c;
}

// Maximum bipartite matching (Kuhn's augmenting paths) between gold and
// predicted entities, edges on exact equality of all three fields.
inline std::size_t brute_match_count(const std::vector<ExtractedEntity>& gold,
                                     const std::vector<ExtractedEntity>& pred) {
  std::vector<int> gold_owner(gold.size(), -1);
  std::function<bool(int, std::vector<char>&)> augment = [&](int p, std::vector<char>& seen) {
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (seen[g] || !(gold[g] == pred[p])) continue;
      seen[g] = 1;
      if (gold_owner[g] < 0 || augment(gold_owner[g], seen)) {
        gold_owner[g] = p;
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    std::vector<char> seen(gold.size(), 0);
    if (augment(static_cast<int>(p), seen)) ++matched;
  }
  return matched;
}

}  // namespace docleak::testing
