#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "macl/label_set.hpp"

namespace macl {

/// Feature rows joined with multi-hot label rows, in label-file order.
struct Dataset {
  std::vector<std::string> ids;
  LabelVocabulary vocabulary;
  std::vector<LabelSet> labels;
  Eigen::MatrixXd features;  // N x feature_dim

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features.cols()); }

  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Parses `id,<label_0>,...` multi-hot labels and `id,f0,...` features, joined by id.
/// Throws ParseError naming the offending row and column.
Dataset load_dataset(const std::filesystem::path& labels_path, const std::filesystem::path& features_path);

/// Labels only; features left empty.
Dataset load_labels(const std::filesystem::path& labels_path);

void write_labels_csv(const Dataset& dataset, const std::filesystem::path& path);
void write_features_csv(const Dataset& dataset, const std::filesystem::path& path);

struct SplitRatios {
  double train = 0.70;
  double val = 0.10;
  double test = 0.20;
};

struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

/// Seeded shuffle then contiguous cut; val and test sizes are floored and the
/// remainder goes to train.
SplitSpec make_splits(std::size_t sample_count, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace macl
