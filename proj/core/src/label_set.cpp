#include "macl/label_set.hpp"

#include <unordered_set>

#include "macl/error.hpp"

namespace macl {

LabelSet::LabelSet(std::initializer_list<std::size_t> labels) {
  for (std::size_t label : labels) insert(label);
}

LabelSet LabelSet::from_indices(const std::vector<std::size_t>& labels) {
  LabelSet s;
  for (std::size_t label : labels) s.insert(label);
  return s;
}

void LabelSet::insert(std::size_t label) {
  if (label >= kMaxLabels) {
    throw Error("label index " + std::to_string(label) + " exceeds the 64-label limit");
  }
  bits_ |= std::uint64_t{1} << label;
}

void LabelSet::erase(std::size_t label) {
  if (label < kMaxLabels) bits_ &= ~(std::uint64_t{1} << label);
}

std::vector<std::size_t> LabelSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  for_each([&](std::size_t j) { out.push_back(j); });
  return out;
}

std::string LabelSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for_each([&](std::size_t j) {
    if (!first) out += ",";
    out += std::to_string(j);
    first = false;
  });
  return out + "}";
}

double jaccard_overlap(LabelSet a, LabelSet b) {
  const std::size_t uni = (a | b).size();
  if (uni == 0) throw Error("Jaccard undefined for two empty sets");
  return static_cast<double>((a & b).size()) / static_cast<double>(uni);
}

LabelVocabulary::LabelVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > LabelSet::kMaxLabels) throw Error("vocabulary exceeds the 64-label limit");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error("duplicate label name '" + n + "'");
  }
}

LabelVocabulary LabelVocabulary::numbered(std::size_t count, std::string_view prefix) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t j = 0; j < count; ++j) names.push_back(std::string(prefix) + std::to_string(j));
  return LabelVocabulary(std::move(names));
}

std::optional<std::size_t> LabelVocabulary::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (names_[j] == name) return j;
  }
  return std::nullopt;
}

}  // namespace macl
