#include "macl/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "macl/error.hpp"

namespace macl {

GradientDecomposition analytic_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                        const LossHyperparams& hyper, std::size_t anchor,
                                        GradientOptions options) {
  hyper.validate();
  if (anchor >= batch.size()) throw Error("anchor index out of range");
  const Eigen::MatrixXd& z = batch.embeddings();
  const auto n = z.rows();
  const auto d = z.cols();
  const auto i = static_cast<Eigen::Index>(anchor);
  const PairContext ctx = build_pair_context(batch.labels(), stats, hyper);

  GradientDecomposition out;
  out.repulsion = Eigen::VectorXd::Zero(d);
  out.total = Eigen::VectorXd::Zero(d);

  // Softmax over A(i) of s_ia / T_ia, max-subtracted.
  std::vector<double> logits(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a) {
    if (a == i && !hyper.include_self) continue;
    logits[a] = z.row(i).dot(z.row(a)) / ctx.temperature(i, a);
    max_logit = std::max(max_logit, logits[a]);
  }
  double shifted_sum = 0.0;
  for (double l : logits) {
    if (std::isfinite(l)) shifted_sum += std::exp(l - max_logit);
  }
  const double log_c = max_logit + std::log(shifted_sum);
  out.normalizer = std::exp(log_c);
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!std::isfinite(logits[a])) continue;
    out.repulsion += (std::exp(logits[a] - log_c) / ctx.temperature(i, a)) * z.row(a).transpose();
  }

  double exact_scale = 0.0;
  double printed_scale = 0.0;
  for (const PositiveGroup& g : positive_groups(batch.labels(), anchor, hyper)) {
    printed_scale += g.scale;
    if (g.members.empty()) continue;
    const double factor = g.scale / static_cast<double>(g.members.size());
    Eigen::VectorXd attraction = Eigen::VectorXd::Zero(d);
    double weight_sum = 0.0;
    for (std::size_t p : g.members) {
      const auto pi = static_cast<Eigen::Index>(p);
      attraction -= factor * (ctx.weight(i, pi) / ctx.temperature(i, pi)) * z.row(pi).transpose();
      weight_sum += ctx.weight(i, pi);
    }
    exact_scale += factor * weight_sum;
    out.attraction_per_label.push_back({g.label, std::move(attraction)});
    out.has_positives = true;
  }

  if (!out.has_positives) {
    out.repulsion.setZero();
    return out;
  }
  out.repulsion_scale = options.repulsion == RepulsionScaling::kExact ? exact_scale : printed_scale;
  for (const auto& a : out.attraction_per_label) out.total += a.vector;
  out.total += out.repulsion_scale * out.repulsion;
  return out;
}

double shared_label_pull(const BatchView& batch, const CorpusLabelStats* stats, const LossHyperparams& hyper,
                         std::size_t anchor, std::size_t target) {
  if (anchor >= batch.size() || target >= batch.size()) throw Error("index out of range");
  if (target == anchor && !hyper.include_self) throw Error("target is not a comparison of the anchor");
  const auto labels = batch.labels();
  if (!labels[anchor].intersects(labels[target])) throw Error("undefined co-occurrence for disjoint pair");

  const PairContext ctx = build_pair_context(labels, stats, hyper);
  const auto i = static_cast<Eigen::Index>(anchor);
  const auto t = static_cast<Eigen::Index>(target);
  const double strength = ctx.weight(i, t) / ctx.temperature(i, t);
  double pull = 0.0;
  for (const PositiveGroup& g : positive_groups(labels, anchor, hyper)) {
    if (std::find(g.members.begin(), g.members.end(), target) == g.members.end()) continue;
    pull -= g.scale * strength / static_cast<double>(g.members.size());
  }
  return pull;
}

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double step) {
  if (!(step > 0.0)) throw Error("finite-difference step must be > 0");
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe(k) = x(k) + step;
    const double up = f(probe);
    probe(k) = x(k) - step;
    const double down = f(probe);
    probe(k) = x(k);
    grad(k) = (up - down) / (2.0 * step);
  }
  return grad;
}

Eigen::VectorXd finite_difference_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                           const LossHyperparams& hyper, std::size_t anchor, double step) {
  hyper.validate();
  if (anchor >= batch.size()) throw Error("anchor index out of range");
  const PairContext ctx = build_pair_context(batch.labels(), stats, hyper);
  const Eigen::VectorXd x = batch.embeddings().row(static_cast<Eigen::Index>(anchor)).transpose();
  return central_difference(
      [&](const Eigen::VectorXd& q) {
        return evaluate_anchor(q, batch.embeddings(), batch.labels(), anchor, ctx, hyper).loss;
      },
      x, step);
}

double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  if (a.size() != b.size()) throw Error("vector size mismatch");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a(k)), std::abs(b(k)), floor});
    worst = std::max(worst, std::abs(a(k) - b(k)) / scale);
  }
  return worst;
}

BatchGradient batch_loss_gradient(const BatchView& batch, const CorpusLabelStats* stats,
                                  const LossHyperparams& hyper) {
  hyper.validate();
  batch.require_unit_norm();
  const PairContext ctx = build_pair_context(batch.labels(), stats, hyper);
  const Eigen::MatrixXd& z = batch.embeddings();
  const std::size_t n = batch.size();

  BatchGradient out;
  out.loss.per_anchor.assign(n, 0.0);
  out.loss.per_anchor_terms.resize(n);
  out.loss.contributing.assign(n, false);

  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd query = z.row(static_cast<Eigen::Index>(i)).transpose();
    AnchorEvaluation eval = evaluate_anchor(query, z, batch.labels(), i, ctx, hyper);
    out.loss.per_anchor[i] = eval.loss;
    out.loss.per_anchor_terms[i] = std::move(eval.terms);
    out.loss.contributing[i] = eval.contributes;
    if (!eval.contributes) continue;
    sum += eval.loss;
    ++out.loss.contributing_count;
    coeff.row(static_cast<Eigen::Index>(i)) = eval.similarity_coefficients.transpose();
  }

  if (out.loss.contributing_count == 0) {
    out.embeddings = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    return out;
  }
  const double inv = 1.0 / static_cast<double>(out.loss.contributing_count);
  out.loss.total = sum * inv;
  // s_ia = z_i . z_a enters as query (row i) and as key (row a).
  out.embeddings = inv * ((coeff + coeff.transpose()) * z);
  return out;
}

}  // namespace macl
