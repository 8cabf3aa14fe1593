#include "macl/losses.hpp"

#include <cmath>
#include <limits>

#include "macl/error.hpp"

namespace macl {

namespace {

constexpr struct {
  LossVariant variant;
  std::string_view name;
} kVariantNames[] = {
    {LossVariant::kSupConAll, "SupConAll"},     {LossVariant::kSupConAny, "SupConAny"},
    {LossVariant::kMulSupCon, "MulSupCon"},     {LossVariant::kWgMulSupCon, "WgMulSupCon"},
    {LossVariant::kMacl, "MACL"},               {LossVariant::kWgMacl, "WgMACL"},
};

bool in_comparisons(std::size_t anchor, std::size_t m, bool include_self) { return include_self || m != anchor; }

}  // namespace

std::string_view to_string(LossVariant variant) {
  for (const auto& entry : kVariantNames) {
    if (entry.variant == variant) return entry.name;
  }
  return "unknown";
}

LossVariant parse_loss_variant(std::string_view name) {
  for (const auto& entry : kVariantNames) {
    if (entry.name == name) return entry.variant;
  }
  throw Error("unknown loss variant '" + std::string(name) +
              "' (expected SupConAll, SupConAny, MulSupCon, WgMulSupCon, MACL or WgMACL)");
}

void LossHyperparams::validate() const {
  if (!(alpha >= 0.0)) throw Error("alpha must be >= 0");
  if (!(beta >= 0.0)) throw Error("beta must be >= 0");
  if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
  if (!(tau > 0.0)) throw Error("tau must be > 0");
}

BatchView::BatchView(const Eigen::MatrixXd& embeddings, std::span<const LabelSet> labels)
    : embeddings_(embeddings), labels_(labels) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw Error("batch has " + std::to_string(embeddings.rows()) + " embeddings but " +
                std::to_string(labels.size()) + " label sets");
  }
  if (labels.size() < 2) throw Error("batch size must be at least 2");
}

void BatchView::require_unit_norm(double tolerance) const {
  for (Eigen::Index i = 0; i < embeddings_.rows(); ++i) {
    const double n = embeddings_.row(i).norm();
    if (!(std::abs(n - 1.0) <= tolerance)) throw Error("embeddings must be unit norm");
  }
}

double plr_weight_from_frequency(double frequency, double epsilon) {
  return 1.0 / (std::log1p(frequency) + epsilon);
}

double pair_weight(const CorpusLabelStats& stats, LabelSet anchor, LabelSet positive, double epsilon) {
  return plr_weight_from_frequency(static_cast<double>(stats.intersection_frequency(anchor, positive)), epsilon);
}

double dts_temperature(double jaccard, double rarity, double alpha, double beta, double epsilon) {
  return std::exp(-alpha * jaccard) + beta / (std::log1p(rarity) + epsilon);
}

double pair_temperature(const CorpusLabelStats& stats, LabelSet anchor, LabelSet other, double alpha,
                        double beta, double epsilon) {
  if (anchor.empty()) throw Error("temperature undefined for an empty anchor label set");
  return dts_temperature(jaccard_overlap(anchor, other), stats.marginal_frequency(anchor), alpha, beta, epsilon);
}

PairContext build_pair_context(std::span<const LabelSet> labels, const CorpusLabelStats* stats,
                               const LossHyperparams& hyper) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  PairContext ctx{Eigen::MatrixXd::Ones(n, n), Eigen::MatrixXd::Constant(n, n, hyper.tau)};

  const bool adaptive = is_adaptive(hyper.variant);
  const bool weights = adaptive && hyper.pair_weighting;
  const bool temperatures = adaptive && hyper.dynamic_temperature;
  if (!weights && !temperatures) return ctx;
  if (stats == nullptr) throw Error("adaptive loss variants require corpus label statistics");

  for (Eigen::Index i = 0; i < n; ++i) {
    const LabelSet yi = labels[static_cast<std::size_t>(i)];
    if (yi.empty()) continue;
    double rarity_term = 0.0;
    if (temperatures) rarity_term = hyper.beta / (std::log1p(stats->marginal_frequency(yi)) + hyper.epsilon);
    for (Eigen::Index a = 0; a < n; ++a) {
      const LabelSet ya = labels[static_cast<std::size_t>(a)];
      if (weights && yi.intersects(ya)) ctx.weight(i, a) = pair_weight(*stats, yi, ya, hyper.epsilon);
      if (temperatures) ctx.temperature(i, a) = std::exp(-hyper.alpha * jaccard_overlap(yi, ya)) + rarity_term;
    }
  }
  return ctx;
}

std::map<std::size_t, std::vector<std::size_t>> build_positive_sets(std::span<const LabelSet> labels,
                                                                    std::size_t anchor, bool include_self) {
  if (anchor >= labels.size()) throw Error("anchor index out of range");
  std::map<std::size_t, std::vector<std::size_t>> sets;
  labels[anchor].for_each([&](std::size_t j) {
    auto& members = sets[j];
    for (std::size_t m = 0; m < labels.size(); ++m) {
      if (in_comparisons(anchor, m, include_self) && labels[m].contains(j)) members.push_back(m);
    }
  });
  return sets;
}

std::vector<PositiveGroup> positive_groups(std::span<const LabelSet> labels, std::size_t anchor,
                                           const LossHyperparams& hyper) {
  const LabelSet yi = labels[anchor];
  std::vector<PositiveGroup> groups;
  if (yi.empty()) return groups;

  if (is_label_wise(hyper.variant)) {
    const double scale = is_label_weighted(hyper.variant) ? 1.0 / static_cast<double>(yi.size()) : 1.0;
    for (auto& [label, members] : build_positive_sets(labels, anchor, hyper.include_self)) {
      groups.push_back({static_cast<int>(label), std::move(members), scale});
    }
    return groups;
  }

  PositiveGroup g;
  for (std::size_t m = 0; m < labels.size(); ++m) {
    if (!in_comparisons(anchor, m, hyper.include_self)) continue;
    const bool positive =
        hyper.variant == LossVariant::kSupConAll ? labels[m] == yi : labels[m].intersects(yi);
    if (positive) g.members.push_back(m);
  }
  groups.push_back(std::move(g));
  return groups;
}

AnchorEvaluation evaluate_anchor(const Eigen::VectorXd& query, const Eigen::MatrixXd& keys,
                                 std::span<const LabelSet> labels, std::size_t anchor,
                                 const PairContext& context, const LossHyperparams& hyper) {
  const auto n = keys.rows();
  const auto i = static_cast<Eigen::Index>(anchor);
  AnchorEvaluation eval;
  eval.similarity_coefficients = Eigen::VectorXd::Zero(n);
  eval.softmax = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd logits = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!in_comparisons(anchor, static_cast<std::size_t>(a), hyper.include_self)) continue;
    logits(a) = keys.row(a).dot(query) / context.temperature(i, a);
    max_logit = std::max(max_logit, logits(a));
  }
  double sum = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (std::isfinite(logits(a))) sum += std::exp(logits(a) - max_logit);
  }
  const double lse = max_logit + std::log(sum);
  eval.log_normalizer = lse;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (std::isfinite(logits(a))) eval.softmax(a) = std::exp(logits(a) - lse);
  }

  for (const PositiveGroup& g : positive_groups(labels, anchor, hyper)) {
    if (g.members.empty()) continue;
    const double factor = g.scale / static_cast<double>(g.members.size());
    double weighted_log_prob = 0.0;
    double weight_sum = 0.0;
    for (std::size_t p : g.members) {
      const auto pi = static_cast<Eigen::Index>(p);
      const double w = context.weight(i, pi);
      weighted_log_prob += w * (logits(pi) - lse);
      weight_sum += w;
      eval.similarity_coefficients(pi) -= factor * w / context.temperature(i, pi);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
      if (eval.softmax(a) != 0.0) {
        eval.similarity_coefficients(a) += factor * weight_sum * eval.softmax(a) / context.temperature(i, a);
      }
    }
    const double value = -factor * weighted_log_prob;
    eval.terms.push_back({g.label, value});
    eval.loss += value;
    eval.contributes = true;
  }
  return eval;
}

double LossBreakdown::per_anchor_per_label(std::size_t anchor, std::size_t label) const {
  for (const GroupTerm& t : per_anchor_terms.at(anchor)) {
    if (t.label == static_cast<int>(label)) return t.value;
  }
  return 0.0;
}

LossBreakdown batch_loss(const BatchView& batch, const CorpusLabelStats* stats, const LossHyperparams& hyper) {
  hyper.validate();
  batch.require_unit_norm();
  const PairContext ctx = build_pair_context(batch.labels(), stats, hyper);

  const std::size_t n = batch.size();
  LossBreakdown out;
  out.per_anchor.assign(n, 0.0);
  out.per_anchor_terms.resize(n);
  out.contributing.assign(n, false);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd query = batch.embeddings().row(static_cast<Eigen::Index>(i)).transpose();
    AnchorEvaluation eval = evaluate_anchor(query, batch.embeddings(), batch.labels(), i, ctx, hyper);
    out.per_anchor[i] = eval.loss;
    out.per_anchor_terms[i] = std::move(eval.terms);
    out.contributing[i] = eval.contributes;
    if (eval.contributes) {
      sum += eval.loss;
      ++out.contributing_count;
    }
  }
  out.total = out.contributing_count > 0 ? sum / static_cast<double>(out.contributing_count) : 0.0;
  return out;
}

double reduction_gap(const BatchView& batch, const CorpusLabelStats* stats, const LossHyperparams& hyper) {
  LossHyperparams pinned = hyper;
  pinned.variant = LossVariant::kMacl;
  pinned.pair_weighting = false;
  pinned.dynamic_temperature = false;
  LossHyperparams baseline = hyper;
  baseline.variant = LossVariant::kMulSupCon;
  return std::abs(batch_loss(batch, stats, pinned).total - batch_loss(batch, stats, baseline).total);
}

}  // namespace macl
