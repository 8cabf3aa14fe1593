#include <algorithm>
#include <random>

#include "macl/gradient.hpp"
#include "macl/random.hpp"
#include "workbench.hpp"

namespace macl::workbench {

namespace {

constexpr LossVariant kVariants[] = {LossVariant::kMacl,      LossVariant::kWgMacl,      LossVariant::kMulSupCon,
                                     LossVariant::kWgMulSupCon, LossVariant::kSupConAny, LossVariant::kSupConAll};

LabelSet random_labels(Rng& rng, std::size_t num_labels) {
  std::uniform_int_distribution<std::uint64_t> bits(1, (std::uint64_t{1} << num_labels) - 1);
  return LabelSet::from_bits(bits(rng));
}

}  // namespace

GradcheckResult run_gradcheck(const GradcheckOptions& options) {
  Rng rng = make_rng(options.seed, "gradcheck");
  std::normal_distribution<double> gauss(0.0, 1.0);
  GradcheckResult result;

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const std::size_t b = std::uniform_int_distribution<std::size_t>(2, options.max_batch)(rng);
    const std::size_t d = std::uniform_int_distribution<std::size_t>(2, options.max_dim)(rng);
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, options.max_labels)(rng);

    Eigen::MatrixXd z(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = gauss(rng);
      z.row(r).normalize();
    }
    std::vector<LabelSet> labels(b);
    for (auto& y : labels) y = random_labels(rng, l);

    // Corpus = batch labels plus random extras, so every positive pair is resident.
    std::vector<LabelSet> corpus = labels;
    const std::size_t extra = std::uniform_int_distribution<std::size_t>(0, 200)(rng);
    for (std::size_t k = 0; k < extra; ++k) corpus.push_back(random_labels(rng, l));
    const CorpusLabelStats stats = CorpusLabelStats::build(corpus);

    LossHyperparams hyper;
    hyper.variant = kVariants[trial % std::size(kVariants)];
    const BatchView batch(z, labels);
    for (std::size_t anchor = 0; anchor < b; ++anchor) {
      const GradientDecomposition g = analytic_gradient(batch, &stats, hyper, anchor);
      const Eigen::VectorXd fd = finite_difference_gradient(batch, &stats, hyper, anchor, options.step);
      result.max_relative_error = std::max(result.max_relative_error, max_relative_error(g.total, fd, options.floor));

      Eigen::VectorXd recomposed = g.repulsion_scale * g.repulsion;
      for (const auto& a : g.attraction_per_label) recomposed += a.vector;
      result.max_decomposition_error =
          std::max(result.max_decomposition_error, (recomposed - g.total).cwiseAbs().maxCoeff());
      ++result.anchors_checked;
    }
    ++result.trials;
  }
  return result;
}

}  // namespace macl::workbench
