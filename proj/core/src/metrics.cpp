#include "macl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "macl/error.hpp"

namespace macl {

namespace {

std::size_t depth(const RankedList& r, std::size_t k) { return std::min(k, r.order.size()); }

// AP over the first `relevant.size()` ranks, normalized by the relevant count.
double average_precision(const std::vector<bool>& relevant) {
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < relevant.size(); ++i) {
    if (!relevant[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double discounted_gain(const std::vector<double>& gains, std::size_t k, bool log2_discount) {
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, gains.size()); ++i) {
    const double rank = static_cast<double>(i + 1);
    const double discount = log2_discount ? std::log2(rank + 1.0) : std::log(1.0 + rank);
    dcg += gains[i] / discount;
  }
  return dcg;
}

double normalized_dcg(std::vector<double> gains, std::size_t k, bool log2_discount) {
  const double dcg = discounted_gain(gains, k, log2_discount);
  std::sort(gains.begin(), gains.end(), std::greater<>());
  const double ideal = discounted_gain(gains, k, log2_discount);
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

template <typename PerQuery>
double mean_percent(std::span<const RankedList> rankings, PerQuery&& per_query) {
  if (rankings.empty()) return 0.0;
  double sum = 0.0;
  for (const RankedList& r : rankings) sum += per_query(r);
  return 100.0 * sum / static_cast<double>(rankings.size());
}

LabelSet query_set(std::span<const LabelSet> query_labels, const RankedList& r) {
  if (r.query >= query_labels.size()) throw Error("ranking query index out of range");
  return query_labels[r.query];
}

// J with the both-empty case mapped to 0 (no relevance) instead of an error.
double safe_jaccard(LabelSet a, LabelSet b) { return (a | b).empty() ? 0.0 : jaccard_overlap(a, b); }

}  // namespace

RankedList rank_gallery(const Eigen::VectorXd& query, const Eigen::MatrixXd& gallery, std::size_t query_index,
                        std::optional<std::size_t> exclude) {
  if (gallery.rows() == 0) throw Error("empty gallery");
  if (gallery.cols() != query.size()) throw Error("query and gallery dimensions differ");
  const Eigen::VectorXd sims = gallery * query;

  RankedList out;
  out.query = query_index;
  out.order.reserve(static_cast<std::size_t>(gallery.rows()));
  for (std::size_t g = 0; g < static_cast<std::size_t>(gallery.rows()); ++g) {
    if (exclude && *exclude == g) continue;
    out.order.push_back(g);
  }
  if (out.order.empty()) throw Error("empty gallery");
  std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = sims(static_cast<Eigen::Index>(a));
    const double sb = sims(static_cast<Eigen::Index>(b));
    return sa != sb ? sa > sb : a < b;
  });
  out.scores.reserve(out.order.size());
  for (std::size_t g : out.order) out.scores.push_back(sims(static_cast<Eigen::Index>(g)));
  return out;
}

double map_sim_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                    std::span<const LabelSet> gallery_labels, std::size_t k) {
  return mean_percent(rankings, [&](const RankedList& r) {
    const LabelSet q = query_set(query_labels, r);
    std::vector<bool> rel(depth(r, k));
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = q.intersects(gallery_labels[r.order[i]]);
    return average_precision(rel);
  });
}

double ndcg_sim_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                     std::span<const LabelSet> gallery_labels, std::size_t k, bool log2_discount) {
  return mean_percent(rankings, [&](const RankedList& r) {
    const LabelSet q = query_set(query_labels, r);
    std::vector<double> gains;
    gains.reserve(r.order.size());
    for (std::size_t g : r.order) {
      gains.push_back(std::exp2(static_cast<double>((q & gallery_labels[g]).size())) - 1.0);
    }
    return normalized_dcg(std::move(gains), k, log2_discount);
  });
}

double jaccard_map_at_threshold(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                                std::span<const LabelSet> gallery_labels, double threshold, std::size_t k) {
  return mean_percent(rankings, [&](const RankedList& r) {
    const LabelSet q = query_set(query_labels, r);
    std::vector<bool> rel(depth(r, k));
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = safe_jaccard(q, gallery_labels[r.order[i]]) >= threshold;
    return average_precision(rel);
  });
}

double ndcg_jaccard_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                         std::span<const LabelSet> gallery_labels, std::size_t k) {
  return mean_percent(rankings, [&](const RankedList& r) {
    const LabelSet q = query_set(query_labels, r);
    std::vector<double> gains;
    gains.reserve(r.order.size());
    for (std::size_t g : r.order) gains.push_back(std::exp2(safe_jaccard(q, gallery_labels[g])) - 1.0);
    return normalized_dcg(std::move(gains), k, true);
  });
}

double wap_at_k(std::span<const RankedList> rankings, std::span<const LabelSet> query_labels,
                std::span<const LabelSet> gallery_labels, std::size_t k) {
  return mean_percent(rankings, [&](const RankedList& r) {
    const LabelSet q = query_set(query_labels, r);
    double running = 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < depth(r, k); ++i) {
      const LabelSet y = gallery_labels[r.order[i]];
      running += safe_jaccard(q, y);
      if (!q.intersects(y)) continue;
      ++hits;
      sum += running / static_cast<double>(i + 1);
    }
    return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
  });
}

nlohmann::json to_json(const MetricReport& r) {
  return nlohmann::json{{"map_sim_at_k", r.map_sim_at_k},
                        {"ndcg_sim_at_k", r.ndcg_sim_at_k},
                        {"map_easy", r.map_easy},
                        {"map_medium", r.map_medium},
                        {"map_hard", r.map_hard},
                        {"ndcg_jaccard_at_k", r.ndcg_jaccard_at_k},
                        {"wap_at_k", r.wap_at_k},
                        {"k_map", r.k_map},
                        {"k_ndcg", r.k_ndcg},
                        {"num_queries", r.num_queries}};
}

MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport r;
  try {
    r.map_sim_at_k = j.at("map_sim_at_k").get<double>();
    r.ndcg_sim_at_k = j.at("ndcg_sim_at_k").get<double>();
    r.map_easy = j.at("map_easy").get<double>();
    r.map_medium = j.at("map_medium").get<double>();
    r.map_hard = j.at("map_hard").get<double>();
    r.ndcg_jaccard_at_k = j.at("ndcg_jaccard_at_k").get<double>();
    r.wap_at_k = j.at("wap_at_k").get<double>();
    r.k_map = j.at("k_map").get<std::size_t>();
    r.k_ndcg = j.at("k_ndcg").get<std::size_t>();
    r.num_queries = j.at("num_queries").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed metric report: ") + e.what());
  }
  return r;
}

std::string serialize(const MetricReport& report) { return to_json(report).dump(2); }

MetricReport parse_metric_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("malformed metric report: ") + e.what());
  }
  return metric_report_from_json(j);
}

namespace {

MetricReport aggregate(const std::vector<RankedList>& rankings, std::span<const LabelSet> query_labels,
                       std::span<const LabelSet> gallery_labels, std::size_t gallery_size,
                       const MetricOptions& options) {
  MetricReport r;
  r.k_map = std::min(options.k_map, gallery_size);
  r.k_ndcg = std::min(options.k_ndcg, gallery_size);
  r.num_queries = rankings.size();
  r.map_sim_at_k = map_sim_at_k(rankings, query_labels, gallery_labels, r.k_map);
  r.ndcg_sim_at_k = ndcg_sim_at_k(rankings, query_labels, gallery_labels, r.k_ndcg, options.unify_log_base);
  r.map_easy = jaccard_map_at_threshold(rankings, query_labels, gallery_labels, options.thresholds[0], r.k_map);
  r.map_medium = jaccard_map_at_threshold(rankings, query_labels, gallery_labels, options.thresholds[1], r.k_map);
  r.map_hard = jaccard_map_at_threshold(rankings, query_labels, gallery_labels, options.thresholds[2], r.k_map);
  r.ndcg_jaccard_at_k = ndcg_jaccard_at_k(rankings, query_labels, gallery_labels, r.k_ndcg);
  r.wap_at_k = wap_at_k(rankings, query_labels, gallery_labels, r.k_ndcg);
  return r;
}

}  // namespace

MetricReport evaluate(const Eigen::MatrixXd& query_embeddings, std::span<const LabelSet> query_labels,
                      const Eigen::MatrixXd& gallery_embeddings, std::span<const LabelSet> gallery_labels,
                      const MetricOptions& options) {
  if (static_cast<std::size_t>(query_embeddings.rows()) != query_labels.size() ||
      static_cast<std::size_t>(gallery_embeddings.rows()) != gallery_labels.size()) {
    throw Error("label/embedding count mismatch");
  }
  std::vector<RankedList> rankings;
  rankings.reserve(query_labels.size());
  for (Eigen::Index q = 0; q < query_embeddings.rows(); ++q) {
    rankings.push_back(rank_gallery(query_embeddings.row(q).transpose(), gallery_embeddings,
                                    static_cast<std::size_t>(q)));
  }
  return aggregate(rankings, query_labels, gallery_labels, gallery_labels.size(), options);
}

MetricReport evaluate_leave_one_out(const Eigen::MatrixXd& embeddings, std::span<const LabelSet> labels,
                                    const MetricOptions& options) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) throw Error("label/embedding count mismatch");
  if (labels.size() < 2) throw Error("leave-one-out evaluation needs at least 2 samples");
  std::vector<RankedList> rankings;
  rankings.reserve(labels.size());
  for (std::size_t q = 0; q < labels.size(); ++q) {
    rankings.push_back(rank_gallery(embeddings.row(static_cast<Eigen::Index>(q)).transpose(), embeddings, q, q));
  }
  return aggregate(rankings, labels, labels, labels.size() - 1, options);
}

}  // namespace macl
