#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <thread>

#include "generators.hpp"
#include "macl/corpus_stats.hpp"
#include "macl/error.hpp"

using macl::CorpusLabelStats;
using macl::LabelSet;

namespace {

// Linear re-count of samples containing every label of `key`.
std::size_t scan_supersets(const std::vector<LabelSet>& corpus, const std::set<int>& key) {
  std::size_t n = 0;
  for (LabelSet y : corpus) {
    bool all = true;
    for (int k : key) all = all && y.contains(static_cast<std::size_t>(k));
    n += all;
  }
  return n;
}

}  // namespace

TEST(LabelSet, SetAlgebra) {
  const LabelSet a{1, 3}, b{1, 2, 3, 4, 6};
  EXPECT_EQ((a & b), (LabelSet{1, 3}));
  EXPECT_EQ((a | b).size(), 5u);
  EXPECT_TRUE(a.is_subset_of(b));
  EXPECT_FALSE(b.is_subset_of(a));
  EXPECT_FALSE(a.intersects(LabelSet{2, 4}));
  EXPECT_EQ(a.indices(), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(a.to_string(), "{1,3}");
  EXPECT_THROW(LabelSet{64}, macl::Error);
}

TEST(LabelVocabulary, RejectsDuplicates) {
  EXPECT_THROW(macl::LabelVocabulary({"a", "b", "a"}), macl::Error);
  const macl::LabelVocabulary v({"airplane", "pavement"});
  EXPECT_EQ(v.index_of("pavement"), 1u);
  EXPECT_FALSE(v.index_of("sea").has_value());
}

TEST(CorpusStats, PerLabelCounts) {
  const std::vector<LabelSet> corpus{{1, 3}, {1}, {3}};
  const auto stats = CorpusLabelStats::build(corpus);
  EXPECT_EQ(stats.sample_count(), 3u);
  EXPECT_EQ(stats.per_label_count(1), 2u);
  EXPECT_EQ(stats.per_label_count(3), 2u);
  EXPECT_EQ(stats.per_label_count(0), 0u);
  for (std::size_t j : {1u, 3u}) EXPECT_EQ(stats.per_label_count(j), stats.containment_count(LabelSet{j}));

  const std::vector<LabelSet> single{{1}};
  const auto one = CorpusLabelStats::build(single);
  EXPECT_EQ(one.sample_count(), 1u);
  EXPECT_EQ(one.per_label_count(1), 1u);
}

TEST(CorpusStats, EmptyCorpusRejected) {
  EXPECT_THROW(
      {
        try {
          CorpusLabelStats::build(std::vector<LabelSet>{});
        } catch (const macl::Error& e) {
          EXPECT_STREQ(e.what(), "empty statistics corpus");
          throw;
        }
      },
      macl::Error);
}

TEST(CorpusStats, IntersectionFrequency) {
  const std::vector<LabelSet> corpus{{1, 3}, {1, 3}, {1}};
  const auto stats = CorpusLabelStats::build(corpus);
  EXPECT_EQ(stats.intersection_frequency({1, 3}, {1, 3}), 2u);
  EXPECT_EQ(stats.intersection_frequency({1, 3, 5}, {1, 2}), 3u);
  EXPECT_THROW(stats.intersection_frequency({1}, {2}), macl::Error);
}

TEST(CorpusStats, ExactIntersectionMode) {
  const std::vector<LabelSet> corpus{{1, 3}, {1, 3}, {1}};
  const auto stats = CorpusLabelStats::build(corpus, {macl::CooccurrenceMode::kExactIntersection});
  EXPECT_EQ(stats.intersection_frequency({1, 3}, {1, 3}), 2u);
  EXPECT_EQ(stats.intersection_frequency({1, 3, 5}, {1, 2}), 1u);
}

TEST(CorpusStats, MarginalFrequency) {
  std::vector<LabelSet> corpus;
  for (int k = 0; k < 2; ++k) corpus.push_back({1, 3});
  for (int k = 0; k < 5; ++k) corpus.push_back({3});
  const auto stats = CorpusLabelStats::build(corpus);
  EXPECT_EQ(stats.marginal_frequency({1, 3}), 2.0);
  EXPECT_EQ(stats.marginal_frequency({3}), 7.0);
  EXPECT_THROW(stats.marginal_frequency({}), macl::Error);

  const auto mean = CorpusLabelStats::build(corpus, {macl::CooccurrenceMode::kContainsIntersection, macl::RarityMode::kMean});
  EXPECT_DOUBLE_EQ(mean.marginal_frequency({1, 3}), 4.5);
  const auto sum = CorpusLabelStats::build(corpus, {macl::CooccurrenceMode::kContainsIntersection, macl::RarityMode::kSum});
  EXPECT_DOUBLE_EQ(sum.marginal_frequency({1, 3}), 9.0);
}

TEST(Jaccard, Examples) {
  EXPECT_DOUBLE_EQ(macl::jaccard_overlap({1, 3}, {1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(macl::jaccard_overlap({1, 3}, {2, 4}), 0.0);
  EXPECT_DOUBLE_EQ(macl::jaccard_overlap({1, 3}, {1, 2, 3, 4, 6}), 0.4);
  EXPECT_THROW(macl::jaccard_overlap({}, {}), macl::Error);
}

TEST(CorpusStats, RandomQueriesMatchLinearScan) {
  std::mt19937_64 rng(11);
  const auto corpus = testgen::label_sets(rng, 200, 6);
  const auto stats = CorpusLabelStats::build(corpus);
  for (int trial = 0; trial < 500; ++trial) {
    const LabelSet a = testgen::nonempty_labels(rng, 6), b = testgen::nonempty_labels(rng, 6);
    if (a.intersects(b)) {
      EXPECT_EQ(stats.intersection_frequency(a, b), scan_supersets(corpus, testgen::to_set(a & b)));
      EXPECT_EQ(stats.intersection_frequency(a, b), stats.intersection_frequency(b, a));
    }
    std::size_t rarest = corpus.size();
    for (int j : testgen::to_set(a)) rarest = std::min(rarest, scan_supersets(corpus, {j}));
    EXPECT_EQ(stats.marginal_frequency(a), static_cast<double>(rarest));

    const double jab = macl::jaccard_overlap(a, b);
    EXPECT_DOUBLE_EQ(jab, macl::jaccard_overlap(b, a));
    EXPECT_GE(jab, 0.0);
    EXPECT_LE(jab, 1.0);
    EXPECT_EQ(jab == 1.0, a == b);
  }
}

TEST(CorpusStats, ContainmentMonotonicity) {
  std::mt19937_64 rng(12);
  const auto corpus = testgen::label_sets(rng, 150, 6);
  const auto stats = CorpusLabelStats::build(corpus);
  for (int trial = 0; trial < 300; ++trial) {
    const LabelSet key = testgen::nonempty_labels(rng, 6);
    const LabelSet sub = LabelSet::from_bits(key.bits() & rng());
    if (sub.empty()) continue;
    EXPECT_GE(stats.containment_count(sub), stats.containment_count(key));
  }
}

TEST(CorpusStats, ResidentPairsCountAtLeastTwo) {
  std::mt19937_64 rng(13);
  const auto corpus = testgen::label_sets(rng, 80, 5);
  const auto stats = CorpusLabelStats::build(corpus);
  for (std::size_t a = 0; a < corpus.size(); ++a) {
    for (std::size_t b = a + 1; b < corpus.size(); ++b) {
      if (corpus[a].intersects(corpus[b])) EXPECT_GE(stats.intersection_frequency(corpus[a], corpus[b]), 2u);
    }
  }
}

TEST(CorpusStats, CacheTransparency) {
  std::mt19937_64 rng(14);
  const auto corpus = testgen::label_sets(rng, 300, 6);
  const auto warm = CorpusLabelStats::build(corpus);
  std::vector<std::pair<LabelSet, LabelSet>> queries;
  while (queries.size() < 1000) {
    const LabelSet a = testgen::nonempty_labels(rng, 6), b = testgen::nonempty_labels(rng, 6);
    if (a.intersects(b)) queries.emplace_back(a, b);
  }
  for (const auto& [a, b] : queries) warm.intersection_frequency(a, b);
  const std::size_t cached = warm.cached_keys();
  EXPECT_LE(cached, std::size_t{63});  // distinct non-empty keys over 6 labels

  const auto cold = CorpusLabelStats::build(corpus);
  for (const auto& [a, b] : queries) {
    EXPECT_EQ(warm.intersection_frequency(a, b), cold.intersection_frequency(a, b));
  }
  EXPECT_EQ(warm.cached_keys(), cached);
}

TEST(CorpusStats, ConcurrentReadersSeeIdenticalCounts) {
  std::mt19937_64 rng(15);
  const auto corpus = testgen::label_sets(rng, 500, 8);
  const auto stats = CorpusLabelStats::build(corpus);
  std::vector<LabelSet> keys;
  for (int k = 0; k < 400; ++k) keys.push_back(testgen::nonempty_labels(rng, 8));

  std::vector<std::vector<std::size_t>> seen(4);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < seen.size(); ++t) {
    workers.emplace_back([&, t] {
      for (LabelSet k : keys) seen[t].push_back(stats.containment_count(k));
    });
  }
  for (auto& w : workers) w.join();
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const std::size_t expected = scan_supersets(corpus, testgen::to_set(keys[k]));
    for (const auto& s : seen) EXPECT_EQ(s[k], expected);
  }
}

TEST(CorpusStats, LongTailedSeventeenLabelCorpus) {
  // Per-label image counts of a 2100-image aerial corpus; index 10 is "pavement".
  const std::array<std::size_t, 17> counts{100, 975, 304, 700, 452, 1011, 739, 1162, 100, 186, 1331, 455, 700, 961, 1021, 811, 98};
  std::vector<LabelSet> corpus(2100);
  std::mt19937_64 rng(2100);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < counts[j]; ++k) corpus[order[k]].insert(j);
  }
  for (auto& y : corpus) {
    if (y.empty()) y.insert(7);
  }
  const auto stats = CorpusLabelStats::build(corpus);
  EXPECT_EQ(stats.sample_count(), 2100u);
  EXPECT_EQ(stats.per_label_count(10), 1331u);
  EXPECT_EQ(stats.label_span(), 17u);
  for (std::size_t j = 0; j < 17; ++j) {
    EXPECT_EQ(stats.per_label_count(j), stats.containment_count(LabelSet{j}));
    EXPECT_LE(stats.containment_count(LabelSet{j}), stats.sample_count());
  }
}
