// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "generators.hpp"
#include "macl/macl.hpp"
#include "reference_metrics.hpp"
#include "tmpdir.hpp"
#include "workbench.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= time_limit_s) {
    o.pass = false;
    o.detail += " (over the " + std::to_string(static_cast<int>(time_limit_s)) + " s limit)";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %d  %-32s %.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome gradient_correctness() {
  const auto r = macl::workbench::run_gradcheck({.trials = 100, .seed = 1});
  return {r.max_relative_error <= 1e-6 && r.trials == 100,
          "max relative error " + fmt("%.3g", r.max_relative_error) + " over " + std::to_string(r.anchors_checked) +
              " anchors"};
}

Outcome special_case_reductions() {
  std::mt19937_64 rng(2);
  double worst_pinned = 0, worst_single = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 15, d = 2 + rng() % 7, num_labels = 1 + rng() % 5;
    const Eigen::MatrixXd z = testgen::unit_rows(rng, n, d);
    const auto labels = testgen::label_sets(rng, n, num_labels);
    auto corpus = testgen::label_sets(rng, 50, num_labels);
    corpus.insert(corpus.end(), labels.begin(), labels.end());
    const auto stats = macl::CorpusLabelStats::build(corpus);
    macl::LossHyperparams h;
    h.tau = 0.1 + 0.1 * static_cast<double>(trial % 5);
    worst_pinned = std::max(worst_pinned, macl::reduction_gap(macl::BatchView(z, labels), &stats, h));

    std::vector<macl::LabelSet> single(n);
    for (auto& y : single) y = macl::LabelSet{static_cast<std::size_t>(rng() % num_labels)};
    const macl::BatchView sb(z, single);
    macl::LossHyperparams mul = h, any = h;
    mul.variant = macl::LossVariant::kMulSupCon;
    any.variant = macl::LossVariant::kSupConAny;
    worst_single = std::max(worst_single, std::abs(macl::batch_loss(sb, nullptr, mul).total -
                                                   macl::batch_loss(sb, nullptr, any).total));
  }
  return {worst_pinned <= 1e-12 && worst_single <= 1e-12,
          "pinned gap " + fmt("%.3g", worst_pinned) + ", single-label gap " + fmt("%.3g", worst_single)};
}

Outcome weight_temperature_properties() {
  constexpr double eps = 1e-8;
  bool ok = true;
  double prev = macl::plr_weight_from_frequency(1, eps);
  for (int f = 2; f <= 1000000; ++f) {
    const double w = macl::plr_weight_from_frequency(f, eps);
    ok = ok && w < prev;
    prev = w;
  }
  const std::string weights = ok ? "w strictly decreasing on f=1..1e6" : "w not strictly decreasing";

  bool t_ok = true;
  for (double h = 1; h <= 1e6; h *= 1.5) {
    double p = 1e9;
    for (int k = 0; k <= 64; ++k) {
      const double t = macl::dts_temperature(k / 64.0, h, 1.5, 0.1, eps);
      t_ok = t_ok && t < p;
      p = t;
    }
  }
  for (int k = 0; k <= 64; ++k) {
    double p = 1e9;
    for (double h = 1; h <= 1e6; h += h < 100 ? 1 : h * 0.1) {
      const double t = macl::dts_temperature(k / 64.0, h, 1.5, 0.1, eps);
      t_ok = t_ok && t < p;
      p = t;
    }
  }

  std::mt19937_64 rng(3);
  const double lo = std::exp(-1.5), hi = 1 + 0.1 / std::log(2.0);
  double t_min = 1e9, t_max = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 15, num_labels = 1 + rng() % 6;
    const auto labels = testgen::label_sets(rng, n, num_labels);
    auto corpus = testgen::label_sets(rng, 100, num_labels);
    corpus.insert(corpus.end(), labels.begin(), labels.end());
    const auto stats = macl::CorpusLabelStats::build(corpus);
    const auto ctx = macl::build_pair_context(labels, &stats, macl::LossHyperparams{});
    for (Eigen::Index i = 0; i < ctx.temperature.rows(); ++i) {
      for (Eigen::Index a = 0; a < ctx.temperature.cols(); ++a) {
        if (i == a) continue;
        t_min = std::min(t_min, ctx.temperature(i, a));
        t_max = std::max(t_max, ctx.temperature(i, a));
      }
    }
  }
  const bool bounds = t_min > lo && t_max <= hi;
  return {ok && t_ok && bounds, weights + "; T monotone in J and h: " + (t_ok ? "yes" : "no") + "; T range [" +
                                    fmt("%.6f", t_min) + ", " + fmt("%.6f", t_max) + "]"};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(4);
  double worst = 0;
  bool monotone = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t q = 1 + rng() % 20, g = 1 + rng() % 50, num_labels = 1 + rng() % 6;
    const Eigen::MatrixXd zq = testgen::unit_rows(rng, q, 4), zg = testgen::unit_rows(rng, g, 4);
    const auto lq = testgen::label_sets(rng, q, num_labels), lg = testgen::label_sets(rng, g, num_labels);
    macl::MetricOptions opts;
    opts.k_map = 1 + rng() % 60;
    opts.k_ndcg = 1 + rng() % 30;
    const auto got = macl::evaluate(zq, lq, zg, lg, opts);

    std::vector<oracle::Labels> gl;
    for (auto y : lg) gl.push_back(testgen::to_set(y));
    std::array<double, 7> ref{};
    for (std::size_t i = 0; i < q; ++i) {
      std::vector<double> scores(g);
      for (std::size_t k = 0; k < g; ++k) {
        scores[k] = 0;
        for (Eigen::Index c = 0; c < 4; ++c) scores[k] += zq(static_cast<Eigen::Index>(i), c) * zg(static_cast<Eigen::Index>(k), c);
      }
      const auto order = oracle::selection_rank(scores, std::vector<bool>(g, false));
      const auto y = testgen::to_set(lq[i]);
      auto jac = [&](std::size_t k) { return oracle::jaccard(y, gl[k]); };
      ref[0] += oracle::ap_at_k(order, opts.k_map, [&](std::size_t k) { return oracle::shared(y, gl[k]) >= 1; });
      ref[1] += oracle::ndcg_at_k(order, opts.k_ndcg, false,
                                  [&](std::size_t k) { return std::pow(2.0, double(oracle::shared(y, gl[k]))) - 1; });
      ref[2] += oracle::ap_at_k(order, opts.k_map, [&](std::size_t k) { return jac(k) >= 0.40; });
      ref[3] += oracle::ap_at_k(order, opts.k_map, [&](std::size_t k) { return jac(k) >= 0.60; });
      ref[4] += oracle::ap_at_k(order, opts.k_map, [&](std::size_t k) { return jac(k) >= 0.80; });
      ref[5] += oracle::ndcg_at_k(order, opts.k_ndcg, true, [&](std::size_t k) { return std::pow(2.0, jac(k)) - 1; });
      ref[6] += oracle::wap_at_k(order, opts.k_ndcg, y, gl);
    }
    const std::array<double, 7> mine{got.map_sim_at_k, got.ndcg_sim_at_k, got.map_easy, got.map_medium,
                                     got.map_hard, got.ndcg_jaccard_at_k, got.wap_at_k};
    for (std::size_t m = 0; m < 7; ++m) worst = std::max(worst, std::abs(mine[m] - 100.0 * ref[m] / double(q)));
    monotone = monotone && got.map_easy >= got.map_medium && got.map_medium >= got.map_hard;
  }
  return {worst <= 1e-9 && monotone,
          "max deviation " + fmt("%.3g", worst) + "; easy >= medium >= hard: " + (monotone ? "yes" : "no")};
}

double mean_cosine(const Eigen::MatrixXd& z) {
  const double n = static_cast<double>(z.rows());
  return ((z * z.transpose()).sum() - n) / (n * n - n);
}

struct EfficacyRun {
  double first_loss, last_loss, trained, untrained, cosine_before, cosine_after;
};

EfficacyRun efficacy_run(const macl::Dataset& data, macl::WorkbenchConfig config) {
  const auto split = macl::make_splits(data.size(), config.split, config.train.seed);
  const auto train_set = data.subset(split.train);
  const auto test_set = data.subset(split.test);
  const auto stats = macl::CorpusLabelStats::build(train_set.labels, config.stats);
  const auto state = macl::train(train_set, stats, config.train);
  const auto initial = macl::init_train_state(data.feature_dim(), config.train);

  macl::MetricOptions opts;
  opts.k_ndcg = config.k_ndcg;
  auto ndcg = [&](const macl::Encoder& e) {
    return macl::evaluate_leave_one_out(e.encode(test_set.features), test_set.labels, opts).ndcg_jaccard_at_k;
  };
  return {state.loss_curve.front(), state.loss_curve.back(), ndcg(state.encoder), ndcg(initial.encoder),
          mean_cosine(initial.encoder.encode(train_set.features)), mean_cosine(state.encoder.encode(train_set.features))};
}

Outcome training_efficacy() {
  const auto spec = macl::SyntheticSpec::geometric(6, 600, 32, 0.6, 0.5, 0.5, 7);
  const auto data = macl::generate_synthetic(spec).dataset;
  macl::WorkbenchConfig config;
  config.train.epochs = 50;
  config.train.batch_size = 32;
  config.train.learning_rate = 0.001;
  config.train.seed = 7;
  config.train.loss.variant = macl::LossVariant::kMacl;
  config.k_ndcg = 20;

  const EfficacyRun r = efficacy_run(data, config);
  // Not asserted: the same run with a milder overlap coefficient.
  macl::WorkbenchConfig mild = config;
  mild.train.loss.alpha = 1.0;
  const EfficacyRun m = efficacy_run(data, mild);

  return {r.last_loss < r.first_loss && r.trained > r.untrained,
          "loss " + fmt("%.4f", r.first_loss) + " -> " + fmt("%.4f", r.last_loss) + "; ndcg_jaccard@20 trained " +
              fmt("%.2f", r.trained) + " vs initial " + fmt("%.2f", r.untrained) + "; mean train cosine " +
              fmt("%.3f", r.cosine_before) + " -> " + fmt("%.3f", r.cosine_after) + " [alpha=1.0: ndcg " +
              fmt("%.2f", m.trained) + " vs " + fmt("%.2f", m.untrained) + ", cosine " + fmt("%.3f", m.cosine_before) +
              " -> " + fmt("%.3f", m.cosine_after) + "]"};
}

Outcome determinism(const TempDir& dir) {
  std::ofstream(dir.path() / "spec.json") << R"({"num_labels": 6, "num_samples": 300, "feature_dim": 16, "seed": 7,
      "profile": {"kind": "geometric", "base": 0.6, "rate": 0.5}})";
  std::ofstream(dir.path() / "config.json") << R"({"epochs": 10, "batch_size": 32, "seed": 11})";
  const auto p = [&](const char* n) { return (dir.path() / n).string(); };
  if (run_cli({"synth", "--spec", p("spec.json"), "--out-prefix", p("det_")}).status != 0) return {false, "synth failed"};
  for (const char* run : {"a", "b"}) {
    const auto r = run_cli({"train", "--labels", p("det_labels.csv"), "--features", p("det_features.csv"), "--config",
                            p("config.json"), "--checkpoint", p((std::string("ck_") + run + ".json").c_str()),
                            "--curve", p((std::string("curve_") + run + ".csv").c_str())});
    if (r.status != 0) return {false, "train exited " + std::to_string(r.status) + ": " + r.output};
  }
  const bool same_ck = read_file(p("ck_a.json")) == read_file(p("ck_b.json"));
  const bool same_curve = read_file(p("curve_a.csv")) == read_file(p("curve_b.csv"));
  return {same_ck && same_curve, std::string("checkpoints ") + (same_ck ? "identical" : "differ") + ", loss curves " +
                                     (same_curve ? "identical" : "differ")};
}

Outcome cli_contract(const TempDir& dir) {
  const auto p = [&](const char* n) { return (dir.path() / n).string(); };
  const auto grad = run_cli({"gradcheck", "--trials", "100", "--seed", "1"});

  std::ofstream(p("bad_labels.csv")) << "id,a,b\nx,1,0\ny,1,5\n";
  const auto bad = run_cli({"stats", p("bad_labels.csv")});
  const bool diag = bad.output.find("row 3:column 3") != std::string::npos;

  // Tiny encoder to evaluate with; its training data is the determinism corpus.
  std::ofstream(p("pair_config.json")) << R"({"epochs": 2, "batch_size": 16, "seed": 1})";
  const auto tr = run_cli({"train", "--labels", p("det_labels.csv"), "--features", p("det_features.csv"), "--config",
                           p("pair_config.json"), "--checkpoint", p("pair_ck.json"), "--curve", p("pair_curve.csv")});
  std::ofstream(p("pair_labels.csv")) << "id,l0,l1,l2,l3,l4,l5\nu,1,0,1,0,0,0\nv,1,0,1,0,0,0\n";
  std::ostringstream feats;
  feats << "id";
  for (int c = 0; c < 16; ++c) feats << ",f" << c;
  feats << "\nu";
  for (int c = 0; c < 16; ++c) feats << "," << 0.1 * c;
  feats << "\nv";
  for (int c = 0; c < 16; ++c) feats << "," << 1.0 - 0.05 * c;
  feats << "\n";
  std::ofstream(p("pair_features.csv")) << feats.str();
  const auto ev = run_cli({"eval", "--checkpoint", p("pair_ck.json"), "--labels", p("pair_labels.csv"), "--features",
                           p("pair_features.csv"), "--split", "all"});
  double map = -1;
  if (ev.status == 0) map = nlohmann::json::parse(ev.output).at("map_sim_at_k").get<double>();

  const bool ok = grad.status == 0 && bad.status == 2 && diag && tr.status == 0 && ev.status == 0 && map == 100.0;
  return {ok, "gradcheck exit " + std::to_string(grad.status) + "; malformed labels exit " + std::to_string(bad.status) +
                  (diag ? " with row/column" : " without row/column") + "; eval map_sim_at_k " + fmt("%.1f", map)};
}

}  // namespace

int main() {
  TempDir dir;
  criterion(1, "gradient correctness", 10, gradient_correctness);
  criterion(2, "special-case reductions", 30, special_case_reductions);
  criterion(3, "weight/temperature properties", 30, weight_temperature_properties);
  criterion(4, "metric oracle equivalence", 20, metric_oracles);
  criterion(5, "toy-scale training efficacy", 120, training_efficacy);
  criterion(6, "determinism", 60, [&] { return determinism(dir); });
  criterion(7, "CLI contract", 60, [&] { return cli_contract(dir); });
  std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
