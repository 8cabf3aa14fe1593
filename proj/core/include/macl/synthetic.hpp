#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "macl/dataset.hpp"

namespace macl {

/// Long-tailed multi-label generator settings.
///
/// Labels are drawn in index order: label j is on with probability
/// sigmoid(logit(marginals[j]) + sum_{k<j, k on} coupling(j, k)). Draws with no
/// label are rejected. Features are the sum of the sample's (seeded, unit-norm)
/// label prototypes plus isotropic Gaussian noise of scale noise_sigma.
struct SyntheticSpec {
  std::size_t num_labels = 6;
  std::size_t num_samples = 600;
  std::size_t feature_dim = 32;
  std::vector<double> marginals;
  Eigen::MatrixXd coupling;  // L x L symmetric; empty means no coupling
  double noise_sigma = 0.5;
  std::uint64_t seed = 7;

  /// marginals[j] = base * rate^j.
  static SyntheticSpec geometric(std::size_t num_labels, std::size_t num_samples, std::size_t feature_dim,
                                 double base, double rate, double noise_sigma, std::uint64_t seed);

  void validate() const;
};

struct SyntheticDraws {
  std::size_t draws = 0;
  std::size_t rejected = 0;
  std::vector<std::size_t> per_label_draws;  // counts over every draw, rejected ones included
};

struct SyntheticResult {
  Dataset dataset;
  SyntheticDraws draws;
  Eigen::MatrixXd prototypes;  // L x d
};

/// Throws Error("infeasible label profile") when more than 99% of draws are empty.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticSpec& spec);

}  // namespace macl
