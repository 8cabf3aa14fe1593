#include "macl/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "macl/error.hpp"
#include "macl/random.hpp"

namespace macl {

SyntheticSpec SyntheticSpec::geometric(std::size_t num_labels, std::size_t num_samples, std::size_t feature_dim,
                                       double base, double rate, double noise_sigma, std::uint64_t seed) {
  SyntheticSpec s;
  s.num_labels = num_labels;
  s.num_samples = num_samples;
  s.feature_dim = feature_dim;
  s.noise_sigma = noise_sigma;
  s.seed = seed;
  double p = base;
  for (std::size_t j = 0; j < num_labels; ++j, p *= rate) s.marginals.push_back(p);
  return s;
}

void SyntheticSpec::validate() const {
  if (num_labels < 1 || num_labels > LabelSet::kMaxLabels) throw Error("num_labels must be in [1, 64]");
  if (num_samples < 1 || feature_dim < 1) throw Error("num_samples and feature_dim must be >= 1");
  if (marginals.size() != num_labels) throw Error("marginal profile must have one entry per label");
  for (double p : marginals) {
    if (!(p > 0.0 && p < 1.0)) throw Error("marginal profile entries must lie in (0, 1)");
  }
  if (coupling.size() != 0) {
    const auto l = static_cast<Eigen::Index>(num_labels);
    if (coupling.rows() != l || coupling.cols() != l) throw Error("coupling matrix must be L x L");
    if (coupling != coupling.transpose()) {
      throw Error("coupling matrix must be symmetric");
    }
  }
  if (!(noise_sigma >= 0.0)) throw Error("noise_sigma must be >= 0");
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto l = static_cast<Eigen::Index>(spec.num_labels);
  const auto d = static_cast<Eigen::Index>(spec.feature_dim);

  SyntheticResult out;
  out.draws.per_label_draws.assign(spec.num_labels, 0);

  Rng proto_rng = make_rng(spec.seed, "synthetic-prototypes");
  Rng label_rng = make_rng(spec.seed, "synthetic-labels");
  Rng noise_rng = make_rng(spec.seed, "synthetic-noise");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  out.prototypes.resize(l, d);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index c = 0; c < d; ++c) out.prototypes(j, c) = gauss(proto_rng);
    out.prototypes.row(j).normalize();
  }

  std::vector<double> base_logit(spec.num_labels);
  for (std::size_t j = 0; j < spec.num_labels; ++j) base_logit[j] = std::log(spec.marginals[j] / (1.0 - spec.marginals[j]));
  const bool coupled = spec.coupling.size() != 0;

  Dataset& ds = out.dataset;
  ds.vocabulary = LabelVocabulary::numbered(spec.num_labels);
  ds.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.num_samples), d);
  while (ds.labels.size() < spec.num_samples) {
    LabelSet s;
    for (std::size_t j = 0; j < spec.num_labels; ++j) {
      double logit = base_logit[j];
      if (coupled) {
        s.for_each([&](std::size_t k) { logit += spec.coupling(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)); });
      }
      if (unit(label_rng) < 1.0 / (1.0 + std::exp(-logit))) {
        s.insert(j);
        ++out.draws.per_label_draws[j];
      }
    }
    ++out.draws.draws;
    if (s.empty()) {
      ++out.draws.rejected;
      if (out.draws.draws >= 1000 && out.draws.rejected * 100 > out.draws.draws * 99) {
        throw Error("infeasible label profile");
      }
      continue;
    }
    ds.labels.push_back(s);
  }

  char id[32];
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    std::snprintf(id, sizeof id, "s%05zu", i);
    ds.ids.emplace_back(id);
    const auto r = static_cast<Eigen::Index>(i);
    ds.labels[i].for_each([&](std::size_t j) { ds.features.row(r) += out.prototypes.row(static_cast<Eigen::Index>(j)); });
    for (Eigen::Index c = 0; c < d; ++c) ds.features(r, c) += spec.noise_sigma * gauss(noise_rng);
  }
  return out;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.num_labels = j.value("num_labels", s.num_labels);
    s.num_samples = j.value("num_samples", s.num_samples);
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.seed = j.value("seed", s.seed);
    if (j.contains("marginals")) {
      s.marginals = j.at("marginals").get<std::vector<double>>();
    } else {
      const nlohmann::json profile = j.value("profile", nlohmann::json::object());
      const std::string kind = profile.value("kind", std::string("geometric"));
      if (kind != "geometric") throw Error("unknown marginal profile kind '" + kind + "'");
      s.marginals = SyntheticSpec::geometric(s.num_labels, 1, 1, profile.value("base", 0.6), profile.value("rate", 0.5),
                                             0.0, 0)
                        .marginals;
    }
    if (j.contains("coupling")) {
      const auto rows = j.at("coupling").get<std::vector<std::vector<double>>>();
      s.coupling.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw Error("coupling matrix rows differ in length");
        for (std::size_t c = 0; c < rows[r].size(); ++c) s.coupling(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const SyntheticSpec& s) {
  nlohmann::json j{{"num_labels", s.num_labels}, {"num_samples", s.num_samples}, {"feature_dim", s.feature_dim},
                   {"marginals", s.marginals},   {"noise_sigma", s.noise_sigma}, {"seed", s.seed}};
  if (s.coupling.size() != 0) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(s.coupling.rows()));
    for (Eigen::Index r = 0; r < s.coupling.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.coupling.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(s.coupling(r, c));
    }
    j["coupling"] = rows;
  }
  return j;
}

}  // namespace macl
