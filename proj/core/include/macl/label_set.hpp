#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace macl {

/// Multi-hot label set over at most 64 label indices, stored as a bit pattern.
class LabelSet {
 public:
  static constexpr std::size_t kMaxLabels = 64;

  constexpr LabelSet() = default;
  LabelSet(std::initializer_list<std::size_t> labels);

  static constexpr LabelSet from_bits(std::uint64_t bits) {
    LabelSet s;
    s.bits_ = bits;
    return s;
  }
  static LabelSet from_indices(const std::vector<std::size_t>& labels);

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(std::size_t label) const {
    return label < kMaxLabels && ((bits_ >> label) & 1U) != 0;
  }
  constexpr bool intersects(LabelSet other) const { return (bits_ & other.bits_) != 0; }
  constexpr bool is_subset_of(LabelSet other) const { return (bits_ & ~other.bits_) == 0; }

  void insert(std::size_t label);
  void erase(std::size_t label);

  /// Label indices in ascending order.
  std::vector<std::size_t> indices() const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t rest = bits_; rest != 0; rest &= rest - 1) {
      f(static_cast<std::size_t>(std::countr_zero(rest)));
    }
  }

  std::string to_string() const;

  friend constexpr LabelSet operator&(LabelSet a, LabelSet b) { return from_bits(a.bits_ & b.bits_); }
  friend constexpr LabelSet operator|(LabelSet a, LabelSet b) { return from_bits(a.bits_ | b.bits_); }
  friend constexpr bool operator==(LabelSet a, LabelSet b) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// |a ∩ b| / |a ∪ b|. Throws when both sets are empty.
double jaccard_overlap(LabelSet a, LabelSet b);

/// Ordered label names; the position of a name is its label index.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  explicit LabelVocabulary(std::vector<std::string> names);

  static LabelVocabulary numbered(std::size_t count, std::string_view prefix = "label_");

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const LabelVocabulary&) const = default;

 private:
  std::vector<std::string> names_;
};

}  // namespace macl
