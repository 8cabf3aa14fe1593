#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "macl/corpus_stats.hpp"
#include "macl/label_set.hpp"

namespace macl {

enum class LossVariant { kSupConAll, kSupConAny, kMulSupCon, kWgMulSupCon, kMacl, kWgMacl };

std::string_view to_string(LossVariant variant);
LossVariant parse_loss_variant(std::string_view name);

/// True for the variants that use corpus-adaptive weights and temperatures.
constexpr bool is_adaptive(LossVariant v) { return v == LossVariant::kMacl || v == LossVariant::kWgMacl; }
/// True for the variants with one contrastive term per anchor label.
constexpr bool is_label_wise(LossVariant v) {
  return v != LossVariant::kSupConAll && v != LossVariant::kSupConAny;
}
/// True for the variants whose label-wise terms are scaled by 1/|y_i|.
constexpr bool is_label_weighted(LossVariant v) {
  return v == LossVariant::kWgMulSupCon || v == LossVariant::kWgMacl;
}

struct LossHyperparams {
  double alpha = 1.5;
  double beta = 0.1;
  double epsilon = 1e-8;
  double tau = 0.3;
  LossVariant variant = LossVariant::kMacl;

  // Ablation switches for the adaptive variants. Off pins w = 1 or T = tau.
  bool pair_weighting = true;
  bool dynamic_temperature = true;

  // Put the anchor itself into A(i) and into every positive set.
  bool include_self = false;

  void validate() const;
};

/// One mini-batch: unit-norm embeddings as rows plus their label sets.
class BatchView {
 public:
  BatchView(const Eigen::MatrixXd& embeddings, std::span<const LabelSet> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(embeddings_.cols()); }
  const Eigen::MatrixXd& embeddings() const { return embeddings_; }
  std::span<const LabelSet> labels() const { return labels_; }

  /// Throws "embeddings must be unit norm" when a row deviates by more than `tolerance`.
  void require_unit_norm(double tolerance = 1e-6) const;

 private:
  const Eigen::MatrixXd& embeddings_;
  std::span<const LabelSet> labels_;
};

/// Pairwise weights w_ia and temperatures T_ia (B×B, diagonal used only with include_self).
struct PairContext {
  Eigen::MatrixXd weight;
  Eigen::MatrixXd temperature;
};

/// PLR weight: 1 / (ln(1 + f) + epsilon).
double plr_weight_from_frequency(double frequency, double epsilon);
double pair_weight(const CorpusLabelStats& stats, LabelSet anchor, LabelSet positive, double epsilon);

/// DTS temperature: exp(-alpha J) + beta / (ln(1 + h) + epsilon).
double dts_temperature(double jaccard, double rarity, double alpha, double beta, double epsilon);
double pair_temperature(const CorpusLabelStats& stats, LabelSet anchor, LabelSet other, double alpha,
                        double beta, double epsilon);

/// Weights and temperatures for every ordered pair in the batch. `stats` may be
/// null unless the variant is adaptive with PLR or DTS enabled.
PairContext build_pair_context(std::span<const LabelSet> labels, const CorpusLabelStats* stats,
                               const LossHyperparams& hyper);

/// P_j for each label j of the anchor, over the comparison set A(anchor).
std::map<std::size_t, std::vector<std::size_t>> build_positive_sets(std::span<const LabelSet> labels,
                                                                    std::size_t anchor,
                                                                    bool include_self = false);

/// A contrastive term of one anchor: its positive set and outer scale.
/// `label` is the anchor label for label-wise variants and -1 for the
/// single-term SupCon variants.
struct PositiveGroup {
  int label = -1;
  std::vector<std::size_t> members;
  double scale = 1.0;
};

/// Positive groups for the anchor under `hyper.variant`, empty groups included.
std::vector<PositiveGroup> positive_groups(std::span<const LabelSet> labels, std::size_t anchor,
                                           const LossHyperparams& hyper);

struct GroupTerm {
  int label = -1;
  double value = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_anchor;
  std::vector<std::vector<GroupTerm>> per_anchor_terms;  // non-empty groups only
  std::vector<bool> contributing;
  std::size_t contributing_count = 0;

  /// Term of (anchor, label); 0 when the label had no positives.
  double per_anchor_per_label(std::size_t anchor, std::size_t label) const;
};

LossBreakdown batch_loss(const BatchView& batch, const CorpusLabelStats* stats,
                         const LossHyperparams& hyper);

/// |MACL with w = 1, T = tau  -  MulSupCon(tau)| on the batch.
double reduction_gap(const BatchView& batch, const CorpusLabelStats* stats, const LossHyperparams& hyper);

/// Loss of one anchor given its query vector and the comparison rows.
/// No unit-norm check: callers perturbing the query rely on that.
struct AnchorEvaluation {
  double loss = 0.0;
  bool contributes = false;
  std::vector<GroupTerm> terms;
  // dL_i / ds_ia for every batch index a (0 outside A(i)).
  Eigen::VectorXd similarity_coefficients;
  // softmax over A(i) of s_ia / T_ia (0 outside A(i)).
  Eigen::VectorXd softmax;
  double log_normalizer = 0.0;
};

AnchorEvaluation evaluate_anchor(const Eigen::VectorXd& query, const Eigen::MatrixXd& keys,
                                 std::span<const LabelSet> labels, std::size_t anchor,
                                 const PairContext& context, const LossHyperparams& hyper);

}  // namespace macl
