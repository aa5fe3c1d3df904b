#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docleak/grouping.hpp"
#include "docleak/types.hpp"
#include "json.hpp"

namespace docleak {

enum class Split { train, val, test };
inline constexpr std::array<Split, 3> kSplits = {Split::train, Split::val, Split::test};

std::string_view to_string(Split s) noexcept;
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double val = 0.0;
  double test = 0.2;

  double of(Split s) const noexcept;
  // Throws Error(invalid_parameter) unless each ratio >= 0 and they sum to 1.
  void validate() const;
  friend bool operator==(const SplitRatios&, const SplitRatios&) = default;
};

// Carves test first; the rest is divided 80/20 into train/val.
SplitRatios default_ratios(double test_fraction);

// "train,val,test", e.g. "0.64,0.16,0.2".
SplitRatios parse_ratios(std::string_view text);
std::string format_ratios(const SplitRatios& r);

struct SplitManifest {
  std::map<std::string, Split> assignments;  // total over the corpus
  std::uint64_t seed = 0;
  SplitRatios ratios;

  std::size_t count(Split s) const noexcept;
  friend bool operator==(const SplitManifest&, const SplitManifest&) = default;
};

// The dataset's own split, read from each document's origin tag. Ratios are
// the realized fractions. Throws Error(unassigned_document).
SplitManifest manifest_from_origin(const Corpus& corpus);

struct LeakageReport {
  std::size_t n_test = 0;
  std::size_t n_leaked_test = 0;
  double leak_fraction = 0.0;
  std::vector<std::string> leaked_doc_ids;     // sorted
  std::vector<std::size_t> offending_groups;   // sorted group ids
};

nlohmann::json to_json(const LeakageReport& report);

// A test document is leaked when its group holds at least one training
// document. Throws Error(unassigned_document) for untagged documents and
// Error(unknown_doc_id) for corpus documents missing from the grouping.
LeakageReport leakage_report(const GroupingResult& groups, const Corpus& corpus);

// Same rule over a manifest; train and val both count as the training side.
LeakageReport leakage_report(const GroupingResult& groups,
                             const SplitManifest& manifest);

// Group-atomic greedy packing: groups ordered by size (descending) then
// smallest member, equal-size runs shuffled by the seed, and each group sent
// to the split with the largest remaining document deficit (ties: test, val,
// train). Throws Error(infeasible_ratios) when a group exceeds every split's
// target size.
SplitManifest resample_splits(const GroupingResult& groups,
                              const SplitRatios& ratios, std::uint64_t seed);

struct FoldOptions {
  // Keep template groups whole across train/val as well.
  bool group_atomic = false;
  const GroupingResult* groups = nullptr;  // required when group_atomic
};

struct CvFolds {
  std::vector<SplitManifest> folds;
};

// k independent seeded train/val draws over the manifest's non-test
// documents; test membership is copied unchanged.
CvFolds make_cv_folds(const SplitManifest& manifest, int k,
                      double train_fraction, std::uint64_t seed,
                      const FoldOptions& options = {});

enum class ViolationKind { straddling_group, unassigned_document, unknown_document,
                           ratio_deviation };
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> group_id;
  std::string doc_id;
  std::string detail;
};

struct SplitDeviation {
  Split split;
  double target_size = 0.0;
  std::size_t realized_size = 0;
  // |realized - target| / corpus size
  double deviation = 0.0;
};

std::vector<SplitDeviation> ratio_deviation(const SplitManifest& manifest);

// Reports, for every straddling group, each member outside the group's
// first split (order train, val, test); every grouped document missing from
// the manifest; and any split whose size misses its target by more than the
// largest group.
std::vector<Violation> verify_manifest(const SplitManifest& manifest,
                                       const GroupingResult& groups);

struct ManifestHeader {
  std::string tool_version;
  Metric metric = Metric::question_overlap;
  double threshold = 0.0;
  std::string groups_digest;
  std::optional<std::size_t> fold;
  // Extra provenance lines, written in order as "# key=value".
  std::vector<std::pair<std::string, std::string>> extra;
};

// "doc_id<TAB>split" lines sorted by doc_id after a "# key=value" header.
std::string format_manifest(const SplitManifest& manifest,
                            const ManifestHeader& header);

// Inverse of format_manifest; seed and ratios are read back from the
// header when present. Throws Error(malformed_annotation).
SplitManifest parse_manifest(std::string_view text);

}  // namespace docleak
