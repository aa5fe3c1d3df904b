#include <random>
#include <set>

#include "docleak/errors.hpp"
#include "docleak/grouping.hpp"
#include "docleak/resampling.hpp"
#include "gtest/gtest.h"
#include "support/fixtures.hpp"

namespace docleak {
namespace {

using testing::make_corpus;
using testing::make_form;

GroupingResult groups_of(const std::vector<std::vector<std::string>>& members) {
  GroupingResult g;
  for (std::size_t i = 0; i < members.size(); ++i) g.groups.push_back({i, members[i]});
  return g;
}

// Random group structure with sizes drawn from a skewed distribution.
GroupingResult random_groups(std::mt19937_64& rng, std::size_t n_groups) {
  std::vector<std::vector<std::string>> members;
  std::geometric_distribution<int> size(0.4);
  int next = 0;
  for (std::size_t i = 0; i < n_groups; ++i) {
    const int n = 1 + std::min(size(rng), 8);
    std::vector<std::string> g;
    for (int j = 0; j < n; ++j) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "d%05d", next++);
      g.emplace_back(buf);
    }
    members.push_back(std::move(g));
  }
  return groups_of(members);
}

ManifestHeader header() {
  return {"test", Metric::question_overlap, 0.7, "abc", std::nullopt, {}};
}

TEST(Ratios, ParseFormatValidate) {
  EXPECT_EQ(parse_ratios("0.64,0.16,0.2"), (SplitRatios{0.64, 0.16, 0.2}));
  EXPECT_EQ(format_ratios({0.8, 0.0, 0.2}), "0.8,0,0.2");
  EXPECT_THROW(parse_ratios("0.5,0.5"), Error);
  EXPECT_THROW(parse_ratios("0.5,0.5,0.5"), Error);
  EXPECT_THROW(parse_ratios("1.2,-0.2,0"), Error);
  EXPECT_THROW(parse_ratios("a,b,c"), Error);
  SplitRatios d = default_ratios(0.25);
  EXPECT_NEAR(d.train + d.val + d.test, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(d.test, 0.25);
  EXPECT_DOUBLE_EQ(d.train, 0.6);
}

TEST(LeakageReport, AllSingletonsNoLeak) {
  Corpus c = make_corpus({make_form("a", OriginSplit::train, {"x"}),
                          make_form("b", OriginSplit::test, {"x"})});
  auto r = leakage_report(groups_of({{"a"}, {"b"}}), c);
  EXPECT_EQ(r.n_test, 1u);
  EXPECT_EQ(r.n_leaked_test, 0u);
  EXPECT_EQ(r.leak_fraction, 0.0);
}

TEST(LeakageReport, SharedGroupLeaks) {
  Corpus c = make_corpus({make_form("t1", OriginSplit::train, {"x"}),
                          make_form("t2", OriginSplit::test, {"x"}),
                          make_form("t3", OriginSplit::test, {"y"})});
  auto r = leakage_report(groups_of({{"t1", "t2"}, {"t3"}}), c);
  EXPECT_EQ(r.n_test, 2u);
  EXPECT_EQ(r.n_leaked_test, 1u);
  EXPECT_DOUBLE_EQ(r.leak_fraction, 0.5);
  EXPECT_EQ(r.leaked_doc_ids, std::vector<std::string>{"t2"});
  EXPECT_EQ(r.offending_groups, std::vector<std::size_t>{0});
}

TEST(LeakageReport, TestOnlyGroupIsNotLeak) {
  Corpus c = make_corpus({make_form("a", OriginSplit::test, {"x"}),
                          make_form("b", OriginSplit::test, {"x"})});
  EXPECT_EQ(leakage_report(groups_of({{"a", "b"}}), c).n_leaked_test, 0u);
}

TEST(LeakageReport, UnassignedAndMissingRejected) {
  Corpus c = make_corpus({make_form("a", OriginSplit::unassigned, {"x"})});
  try {
    leakage_report(groups_of({{"a"}}), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unassigned_document);
  }
  Corpus d = make_corpus({make_form("a", OriginSplit::train, {"x"})});
  EXPECT_THROW(leakage_report(groups_of({}), d), Error);
}

TEST(LeakageReport, ValCountsAsTrainingSide) {
  SplitManifest m;
  m.assignments = {{"a", Split::val}, {"b", Split::test}};
  EXPECT_EQ(leakage_report(groups_of({{"a", "b"}}), m).n_leaked_test, 1u);
}

TEST(ResampleSplits, TenSingletonsExactSizes) {
  std::vector<std::vector<std::string>> members;
  for (int i = 0; i < 10; ++i) members.push_back({"s" + std::to_string(i)});
  for (std::uint64_t seed : {0ull, 1ull, 77ull, 123456789ull}) {
    auto m = resample_splits(groups_of(members), {0.8, 0.0, 0.2}, seed);
    EXPECT_EQ(m.count(Split::train), 8u);
    EXPECT_EQ(m.count(Split::val), 0u);
    EXPECT_EQ(m.count(Split::test), 2u);
  }
}

TEST(ResampleSplits, LargeGroupLandsInTrain) {
  auto g = groups_of({{"a0", "a1", "a2", "a3", "a4", "a5"}, {"b"}, {"c"}, {"d"}, {"e"}});
  auto m = resample_splits(g, {0.8, 0.0, 0.2}, 5);
  for (const auto& d : g.groups[0].members) EXPECT_EQ(m.assignments.at(d), Split::train);
  EXPECT_EQ(m.count(Split::train), 8u);
  EXPECT_EQ(m.count(Split::test), 2u);
}

TEST(ResampleSplits, DeterministicAndByteIdentical) {
  std::mt19937_64 rng(3);
  auto g = random_groups(rng, 40);
  auto a = resample_splits(g, {0.64, 0.16, 0.2}, 99);
  auto b = resample_splits(g, {0.64, 0.16, 0.2}, 99);
  EXPECT_EQ(a, b);
  EXPECT_EQ(format_manifest(a, header()), format_manifest(b, header()));
}

TEST(ResampleSplits, SeedChangesTieOrder) {
  std::mt19937_64 rng(4);
  auto g = random_groups(rng, 30);
  std::set<std::map<std::string, Split>> distinct;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    distinct.insert(resample_splits(g, {0.64, 0.16, 0.2}, seed).assignments);
  }
  EXPECT_GE(distinct.size(), 2u);
}

TEST(ResampleSplits, InfeasibleRatios) {
  auto g = groups_of({{"a", "b", "c", "d", "e", "f"}, {"g"}, {"h"}, {"i"}, {"j"}});
  try {
    resample_splits(g, {0.5, 0.0, 0.5}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible_ratios);
  }
  EXPECT_THROW(resample_splits(g, {0.5, 0.5, 0.5}, 0), Error);
}

TEST(ResampleSplits, InvariantsOverRandomStructures) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = random_groups(rng, 20 + rng() % 60);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SplitRatios ratios = default_ratios(0.2);
      auto m = resample_splits(g, ratios, seed);
      ASSERT_EQ(m.assignments.size(), g.document_count());
      for (const auto& grp : g.groups) {
        std::set<Split> seen;
        for (const auto& d : grp.members) seen.insert(m.assignments.at(d));
        EXPECT_EQ(seen.size(), 1u);
      }
      const double n = static_cast<double>(g.document_count());
      for (Split s : kSplits) {
        const double dev = std::abs(static_cast<double>(m.count(s)) - ratios.of(s) * n);
        EXPECT_LE(dev, static_cast<double>(g.max_group_size()) + 1e-9);
      }
      EXPECT_TRUE(verify_manifest(m, g).empty());
      EXPECT_EQ(leakage_report(g, m).n_leaked_test, 0u);
    }
  }
}

TEST(CvFolds, FourFoldsEightyTwenty) {
  SplitManifest m;
  for (int i = 0; i < 100; ++i) m.assignments["p" + std::to_string(i)] = Split::train;
  for (int i = 0; i < 25; ++i) m.assignments["t" + std::to_string(i)] = Split::test;
  auto cv = make_cv_folds(m, 4, 0.8, 7);
  ASSERT_EQ(cv.folds.size(), 4u);
  std::set<std::map<std::string, Split>> distinct;
  for (const auto& f : cv.folds) {
    EXPECT_EQ(f.count(Split::train), 80u);
    EXPECT_EQ(f.count(Split::val), 20u);
    EXPECT_EQ(f.count(Split::test), 25u);
    for (int i = 0; i < 25; ++i) EXPECT_EQ(f.assignments.at("t" + std::to_string(i)), Split::test);
    distinct.insert(f.assignments);
  }
  EXPECT_GT(distinct.size(), 1u);
}

TEST(CvFolds, SingleFoldHalf) {
  SplitManifest m;
  m.assignments = {{"a", Split::train}, {"b", Split::train}};
  auto cv = make_cv_folds(m, 1, 0.5, 0);
  ASSERT_EQ(cv.folds.size(), 1u);
  EXPECT_EQ(cv.folds[0].count(Split::train), 1u);
  EXPECT_EQ(cv.folds[0].count(Split::val), 1u);
}

TEST(CvFolds, SameSeedSameFolds) {
  SplitManifest m;
  for (int i = 0; i < 30; ++i) m.assignments["p" + std::to_string(i)] = Split::train;
  auto a = make_cv_folds(m, 4, 0.8, 42);
  auto b = make_cv_folds(m, 4, 0.8, 42);
  ASSERT_EQ(a.folds.size(), b.folds.size());
  for (std::size_t i = 0; i < a.folds.size(); ++i) EXPECT_EQ(a.folds[i], b.folds[i]);
}

TEST(CvFolds, InvalidParameters) {
  SplitManifest m;
  m.assignments = {{"a", Split::train}};
  EXPECT_THROW(make_cv_folds(m, 0, 0.8, 0), Error);
  EXPECT_THROW(make_cv_folds(m, 4, 0.0, 0), Error);
  EXPECT_THROW(make_cv_folds(m, 4, 1.0, 0), Error);
  FoldOptions atomic;
  atomic.group_atomic = true;
  EXPECT_THROW(make_cv_folds(m, 4, 0.8, 0, atomic), Error);
}

TEST(CvFolds, GroupAtomicKeepsGroupsWhole) {
  std::mt19937_64 rng(8);
  auto g = random_groups(rng, 50);
  auto m = resample_splits(g, default_ratios(0.2), 1);
  FoldOptions opt{true, &g};
  auto cv = make_cv_folds(m, 4, 0.8, 1, opt);
  for (const auto& f : cv.folds) {
    EXPECT_EQ(f.count(Split::test), m.count(Split::test));
    for (const auto& grp : g.groups) {
      std::set<Split> seen;
      for (const auto& d : grp.members) seen.insert(f.assignments.at(d));
      EXPECT_EQ(seen.size(), 1u);
    }
  }
}

TEST(VerifyManifest, StraddlingPairOneViolation) {
  auto g = groups_of({{"a", "b"}, {"c"}});
  SplitManifest m;
  m.ratios = {0.34, 0.0, 0.66};
  m.assignments = {{"a", Split::train}, {"b", Split::test}, {"c", Split::test}};
  auto v = verify_manifest(m, g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::straddling_group);
  EXPECT_EQ(v[0].group_id, std::optional<std::size_t>(0));
  EXPECT_EQ(v[0].doc_id, "b");
}

TEST(VerifyManifest, UnassignedAndUnknown) {
  auto g = groups_of({{"a"}, {"b"}});
  SplitManifest m;
  m.ratios = {0.5, 0.0, 0.5};
  m.assignments = {{"a", Split::train}, {"z", Split::test}};
  auto v = verify_manifest(m, g);
  std::multiset<ViolationKind> kinds;
  for (const auto& x : v) kinds.insert(x.kind);
  EXPECT_EQ(kinds.count(ViolationKind::unassigned_document), 1u);
  EXPECT_EQ(kinds.count(ViolationKind::unknown_document), 1u);
}

TEST(VerifyManifest, RatioDeviationBeyondLargestGroup) {
  auto g = groups_of({{"a"}, {"b"}, {"c"}, {"d"}});
  SplitManifest m;
  m.ratios = {0.0, 0.0, 1.0};
  m.assignments = {{"a", Split::train}, {"b", Split::train}, {"c", Split::train},
                   {"d", Split::test}};
  bool found = false;
  for (const auto& x : verify_manifest(m, g)) found |= x.kind == ViolationKind::ratio_deviation;
  EXPECT_TRUE(found);
}

TEST(Manifest, FormatParseRoundTrip) {
  std::mt19937_64 rng(5);
  auto g = random_groups(rng, 15);
  auto m = resample_splits(g, {0.64, 0.16, 0.2}, 31337);
  ManifestHeader h = header();
  h.fold = 2;
  h.extra = {{"config_sha256", "deadbeef"}};
  const std::string text = format_manifest(m, h);
  EXPECT_EQ(text.rfind("# docleak split manifest\n", 0), 0u);
  EXPECT_NE(text.find("# seed=31337\n"), std::string::npos);
  EXPECT_NE(text.find("# fold=2\n"), std::string::npos);
  EXPECT_EQ(parse_manifest(text), m);
}

TEST(Manifest, MalformedRejected) {
  EXPECT_THROW(parse_manifest("a\tnowhere\n"), Error);
  EXPECT_THROW(parse_manifest("only-one-field\n"), Error);
}

TEST(Manifest, FromOrigin) {
  Corpus c = make_corpus({make_form("a", OriginSplit::train, {"x"}),
                          make_form("b", OriginSplit::test, {"x"}),
                          make_form("c", OriginSplit::train, {"x"}),
                          make_form("d", OriginSplit::train, {"x"})});
  auto m = manifest_from_origin(c);
  EXPECT_EQ(m.count(Split::train), 3u);
  EXPECT_DOUBLE_EQ(m.ratios.test, 0.25);
}

}  // namespace
}  // namespace docleak
