#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "macl/label_set.hpp"

namespace macl {

/// Gallery indices by descending dot product, ties broken by ascending index.
struct RankedList {
  std::size_t query = 0;
  std::vector<std::size_t> order;
  std::vector<double> scores;
};

/// Ranks every gallery row except `exclude`. Throws on an empty gallery.
RankedList rank_gallery(const Eigen::VectorXd& query, const Eigen::MatrixXd& gallery, std::size_t query_index = 0,
                        std::optional<std::size_t> exclude = std::nullopt);

// Every metric below returns a percentage in [0, 100]. `RankedList::query`
// indexes `query_labels`, the entries of `order` index `gallery_labels`.
// Lists shorter than k are evaluated over their full length.

/// mAP@k with relevance "shares at least one label".
double map_sim_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                    std::span<const LabelSet> gallery_labels, std::size_t k);

/// nDCG@k with gain 2^|y_q ∩ y_i| - 1. The discount is ln(1 + i) unless
/// `log2_discount` is set.
double ndcg_sim_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                     std::span<const LabelSet> gallery_labels, std::size_t k, bool log2_discount = false);

/// mAP@k with relevance J(y_q, y_i) >= threshold.
double jaccard_map_at_threshold(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                                std::span<const LabelSet> gallery_labels, double threshold, std::size_t k);

/// nDCG@k with gain 2^J - 1 and discount log2(i + 1).
double ndcg_jaccard_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                         std::span<const LabelSet> gallery_labels, std::size_t k);

/// Weighted AP@k: precision replaced by the running mean of J up to each rank.
double wap_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                std::span<const LabelSet> gallery_labels, std::size_t k);

struct MetricOptions {
  std::size_t k_map = 5000;
  std::size_t k_ndcg = 100;
  std::array<double, 3> thresholds{0.40, 0.60, 0.80};
  bool unify_log_base = false;  // base-2 discount for the cosine nDCG too
};

struct MetricReport {
  double map_sim_at_k = 0.0;
  double ndcg_sim_at_k = 0.0;
  double map_easy = 0.0;
  double map_medium = 0.0;
  double map_hard = 0.0;
  double ndcg_jaccard_at_k = 0.0;
  double wap_at_k = 0.0;
  std::size_t k_map = 0;
  std::size_t k_ndcg = 0;
  std::size_t num_queries = 0;

  bool operator==(const MetricReport&) const = default;
};

nlohmann::json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const nlohmann::json& j);
std::string serialize(const MetricReport& report);
MetricReport parse_metric_report(const std::string& text);

/// Each query ranks the full gallery.
MetricReport evaluate(const Eigen::MatrixXd& query_embeddings, std::span<const LabelSet> query_labels,
                      const Eigen::MatrixXd& gallery_embeddings, std::span<const LabelSet> gallery_labels,
                      const MetricOptions& options = {});

/// Each row queries all remaining rows. k is clipped to the gallery size.
MetricReport evaluate_leave_one_out(const Eigen::MatrixXd& embeddings, std::span<const LabelSet> labels,
                                    const MetricOptions& options = {});

}  // namespace macl
