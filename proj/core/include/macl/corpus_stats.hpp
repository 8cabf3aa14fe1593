#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "macl/label_set.hpp"

namespace macl {

// How f(a, b) is counted over the corpus.
enum class CooccurrenceMode {
  kContainsIntersection,  // samples whose label set is a superset of a ∩ b
  kExactIntersection,     // samples whose label set equals a ∩ b
};

// How the per-label marginals of an anchor are aggregated into h(a).
enum class RarityMode { kMin, kMean, kSum };

struct StatsOptions {
  CooccurrenceMode cooccurrence = CooccurrenceMode::kContainsIntersection;
  RarityMode rarity = RarityMode::kMin;
};

/// Corpus-level label statistics backing the pair weights and temperatures.
///
/// The corpus is immutable after construction. Superset counts are memoized
/// by the bit pattern of the queried key; the memo is guarded by a shared
/// mutex, so one instance may be queried from several threads at once.
class CorpusLabelStats {
 public:
  static CorpusLabelStats build(std::span<const LabelSet> labels, StatsOptions options = {});

  CorpusLabelStats(CorpusLabelStats&&) noexcept;
  CorpusLabelStats& operator=(CorpusLabelStats&&) noexcept;
  ~CorpusLabelStats();

  std::size_t sample_count() const { return corpus_.size(); }
  const StatsOptions& options() const { return options_; }

  /// Number of corpus samples carrying `label`.
  std::size_t per_label_count(std::size_t label) const;

  /// One past the highest label index present anywhere in the corpus.
  std::size_t label_span() const { return label_span_; }

  /// Samples whose label set contains every label of `key` (memoized).
  std::size_t containment_count(LabelSet key) const;

  /// Samples whose label set equals `key` exactly (memoized).
  std::size_t exact_count(LabelSet key) const;

  /// f(a, b). Throws for disjoint pairs.
  std::size_t intersection_frequency(LabelSet a, LabelSet b) const;

  /// h(a): per-label marginals of `a` aggregated per `options().rarity`.
  double marginal_frequency(LabelSet a) const;

  /// Number of memoized keys (both caches).
  std::size_t cached_keys() const;

 private:
  struct Memo;

  CorpusLabelStats(std::vector<std::uint64_t> corpus, StatsOptions options);

  std::size_t scan_supersets(std::uint64_t key) const;
  std::size_t scan_exact(std::uint64_t key) const;

  std::vector<std::uint64_t> corpus_;
  StatsOptions options_;
  std::array<std::size_t, LabelSet::kMaxLabels> per_label_{};
  std::size_t label_span_ = 0;
  std::unique_ptr<Memo> memo_;
};

}  // namespace macl
