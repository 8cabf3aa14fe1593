#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "macl/corpus_stats.hpp"
#include "macl/losses.hpp"

namespace macl {

// Scale applied to the repulsion vector when composing the anchor gradient.
enum class RepulsionScaling {
  // Sum over non-empty groups of scale_g * mean_{p in P_g} w_ip. Equals the
  // number of non-skipped labels when w = 1; exact derivative of the loss.
  kExact,
  // |y_i| (times the group scale) regardless of weights or empty groups.
  kPrintedLabelCount,
};

struct GradientOptions {
  RepulsionScaling repulsion = RepulsionScaling::kExact;
};

struct LabelAttraction {
  int label = -1;
  Eigen::VectorXd vector;
};

/// Anchor gradient split into per-label attraction and a shared repulsion.
///   total = sum_j attraction_j + repulsion_scale * repulsion
struct GradientDecomposition {
  std::vector<LabelAttraction> attraction_per_label;
  Eigen::VectorXd repulsion;
  double repulsion_scale = 0.0;
  Eigen::VectorXd total;
  double normalizer = 0.0;  // C = sum_{a in A(i)} exp(s_ia / T_ia)
  bool has_positives = false;
};

/// Gradient of the anchor's loss term with respect to its own raw embedding,
/// comparisons held constant.
GradientDecomposition analytic_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                        const LossHyperparams& hyper, std::size_t anchor,
                                        GradientOptions options = {});

/// Total attraction coefficient that comparison `target` exerts on the anchor.
double shared_label_pull(const BatchView& batch, const CorpusLabelStats* stats,
                         const LossHyperparams& hyper, std::size_t anchor, std::size_t target);

/// Coordinate-wise central differences of `f` at `x`.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double step);

/// Central differences of the anchor's loss term with respect to its raw
/// query vector. The perturbed vector is not re-normalized.
Eigen::VectorXd finite_difference_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                           const LossHyperparams& hyper, std::size_t anchor,
                                           double step);

/// Max over coordinates of |a - b| / max(|a|, |b|, floor).
double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-9);

struct BatchGradient {
  LossBreakdown loss;
  Eigen::MatrixXd embeddings;  // d total / d z for every batch row, both roles
};

/// Batch mean loss and its gradient with respect to all embedding rows.
BatchGradient batch_loss_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                  const LossHyperparams& hyper);

}  // namespace macl
