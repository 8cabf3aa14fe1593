#include "macl/corpus_stats.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "macl/error.hpp"

namespace macl {

struct CorpusLabelStats::Memo {
  mutable std::shared_mutex mutex;
  std::unordered_map<std::uint64_t, std::size_t> containment;
  std::unordered_map<std::uint64_t, std::size_t> exact;
};

namespace {

// Memoized lookup: readers share the lock, a miss computes outside the lock
// and inserts under the exclusive lock. A concurrent duplicate computation
// yields the same count, so emplace losing the race is harmless.
template <typename Compute>
std::size_t memoized(std::shared_mutex& mutex, std::unordered_map<std::uint64_t, std::size_t>& table,
                     std::uint64_t key, Compute&& compute) {
  {
    std::shared_lock lock(mutex);
    if (auto it = table.find(key); it != table.end()) return it->second;
  }
  const std::size_t value = compute();
  std::unique_lock lock(mutex);
  return table.emplace(key, value).first->second;
}

}  // namespace

CorpusLabelStats::CorpusLabelStats(std::vector<std::uint64_t> corpus, StatsOptions options)
    : corpus_(std::move(corpus)), options_(options), memo_(std::make_unique<Memo>()) {}

CorpusLabelStats::CorpusLabelStats(CorpusLabelStats&&) noexcept = default;
CorpusLabelStats& CorpusLabelStats::operator=(CorpusLabelStats&&) noexcept = default;
CorpusLabelStats::~CorpusLabelStats() = default;

CorpusLabelStats CorpusLabelStats::build(std::span<const LabelSet> labels, StatsOptions options) {
  if (labels.empty()) throw Error("empty statistics corpus");
  std::vector<std::uint64_t> corpus;
  corpus.reserve(labels.size());
  for (LabelSet s : labels) corpus.push_back(s.bits());

  CorpusLabelStats stats(std::move(corpus), options);
  for (LabelSet s : labels) {
    s.for_each([&](std::size_t j) { ++stats.per_label_[j]; });
  }
  for (std::size_t j = 0; j < LabelSet::kMaxLabels; ++j) {
    if (stats.per_label_[j] > 0) stats.label_span_ = j + 1;
  }
  for (std::size_t j = 0; j < stats.label_span_; ++j) {
    stats.memo_->containment.emplace(std::uint64_t{1} << j, stats.per_label_[j]);
  }
  return stats;
}

std::size_t CorpusLabelStats::per_label_count(std::size_t label) const {
  return label < LabelSet::kMaxLabels ? per_label_[label] : 0;
}

std::size_t CorpusLabelStats::scan_supersets(std::uint64_t key) const {
  return static_cast<std::size_t>(
      std::count_if(corpus_.begin(), corpus_.end(), [key](std::uint64_t s) { return (s & key) == key; }));
}

std::size_t CorpusLabelStats::scan_exact(std::uint64_t key) const {
  return static_cast<std::size_t>(std::count(corpus_.begin(), corpus_.end(), key));
}

std::size_t CorpusLabelStats::containment_count(LabelSet key) const {
  return memoized(memo_->mutex, memo_->containment, key.bits(), [&] { return scan_supersets(key.bits()); });
}

std::size_t CorpusLabelStats::exact_count(LabelSet key) const {
  return memoized(memo_->mutex, memo_->exact, key.bits(), [&] { return scan_exact(key.bits()); });
}

std::size_t CorpusLabelStats::intersection_frequency(LabelSet a, LabelSet b) const {
  const LabelSet shared = a & b;
  if (shared.empty()) throw Error("undefined co-occurrence for disjoint pair");
  return options_.cooccurrence == CooccurrenceMode::kContainsIntersection ? containment_count(shared)
                                                                          : exact_count(shared);
}

double CorpusLabelStats::marginal_frequency(LabelSet a) const {
  if (a.empty()) throw Error("rarity undefined for empty label set");
  switch (options_.rarity) {
    case RarityMode::kMin: {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      a.for_each([&](std::size_t j) { best = std::min(best, per_label_count(j)); });
      return static_cast<double>(best);
    }
    case RarityMode::kMean:
    case RarityMode::kSum: {
      double sum = 0.0;
      a.for_each([&](std::size_t j) { sum += static_cast<double>(per_label_count(j)); });
      return options_.rarity == RarityMode::kSum ? sum : sum / static_cast<double>(a.size());
    }
  }
  return 0.0;
}

std::size_t CorpusLabelStats::cached_keys() const {
  std::shared_lock lock(memo_->mutex);
  return memo_->containment.size() + memo_->exact.size();
}

}  // namespace macl
