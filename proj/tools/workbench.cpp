#include "workbench.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "macl/checkpoint.hpp"
#include "macl/config.hpp"
#include "macl/dataset.hpp"
#include "macl/error.hpp"
#include "macl/metrics.hpp"
#include "macl/synthetic.hpp"
#include "macl/trainer.hpp"

namespace macl::workbench {

namespace {

// Flag values that override the config file when given.
struct TrainOverrides {
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> tau;
  std::optional<std::string> variant;

  void bind(CLI::App& cmd) {
    cmd.add_option("--epochs", epochs, "Override epochs");
    cmd.add_option("--batch-size", batch_size, "Override batch size");
    cmd.add_option("--seed", seed, "Override the root seed");
    cmd.add_option("--lr", learning_rate, "Override the learning rate");
    cmd.add_option("--alpha", alpha, "Override alpha");
    cmd.add_option("--beta", beta, "Override beta");
    cmd.add_option("--tau", tau, "Override tau");
    cmd.add_option("--variant", variant, "Override the loss variant");
  }

  void apply(WorkbenchConfig& c) const {
    if (epochs) c.train.epochs = *epochs;
    if (batch_size) c.train.batch_size = *batch_size;
    if (seed) c.train.seed = *seed;
    if (learning_rate) c.train.learning_rate = *learning_rate;
    if (alpha) c.train.loss.alpha = *alpha;
    if (beta) c.train.loss.beta = *beta;
    if (tau) c.train.loss.tau = *tau;
    if (variant) c.train.loss.variant = parse_loss_variant(*variant);
    c.train.validate();
  }
};

WorkbenchConfig read_config(const std::string& path) { return path.empty() ? WorkbenchConfig{} : load_config(path); }

std::vector<std::size_t> split_indices(const SplitSpec& s, const std::string& name, std::size_t n) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  if (name == "test") return s.test;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return all;
}

struct TrainedModel {
  TrainState state;
  WorkbenchConfig config;
};

TrainedModel train_on_split(const Dataset& data, const WorkbenchConfig& config) {
  const SplitSpec split = make_splits(data.size(), config.split, config.train.seed);
  const Dataset train_set = data.subset(split.train);
  const CorpusLabelStats stats = CorpusLabelStats::build(train_set.labels, config.stats);
  return {train(train_set, stats, config.train), config};
}

MetricReport evaluate_split(const Encoder& encoder, const Dataset& data, const WorkbenchConfig& config,
                            const std::string& split_name) {
  std::vector<std::size_t> idx;
  if (split_name == "all") {
    idx = split_indices({}, "all", data.size());
  } else {
    idx = split_indices(make_splits(data.size(), config.split, config.train.seed), split_name, data.size());
  }
  const Dataset part = data.subset(idx);
  MetricOptions opts;
  opts.k_map = config.k_map;
  opts.k_ndcg = config.k_ndcg;
  return evaluate_leave_one_out(encoder.encode(part.features), part.labels, opts);
}

void write_curve(const std::vector<double>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "epoch,mean_loss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < curve.size(); ++e) out << e + 1 << ',' << curve[e] << '\n';
}

int cmd_stats(const std::string& labels_path, std::size_t top, std::ostream& out) {
  const Dataset data = load_labels(labels_path);
  const CorpusLabelStats stats = CorpusLabelStats::build(data.labels);
  nlohmann::json labels = nlohmann::json::array();
  for (std::size_t j = 0; j < data.vocabulary.size(); ++j) {
    labels.push_back({{"name", data.vocabulary.name(j)}, {"count", stats.per_label_count(j)}});
  }
  struct Pair {
    std::size_t a, b, count;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < data.vocabulary.size(); ++a) {
    for (std::size_t b = a + 1; b < data.vocabulary.size(); ++b) {
      const std::size_t c = stats.containment_count(LabelSet{a, b});
      if (c > 0) pairs.push_back({a, b, c});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.count > y.count; });
  nlohmann::json inter = nlohmann::json::array();
  for (std::size_t k = 0; k < std::min(top, pairs.size()); ++k) {
    inter.push_back({{"labels", {data.vocabulary.name(pairs[k].a), data.vocabulary.name(pairs[k].b)}},
                     {"frequency", pairs[k].count}});
  }
  out << nlohmann::json{{"sample_count", stats.sample_count()}, {"labels", labels}, {"top_intersections", inter}}.dump(2)
      << '\n';
  return kExitOk;
}

int cmd_train(const std::string& labels, const std::string& features, const std::string& config_path,
              const TrainOverrides& overrides, const std::string& checkpoint_path, const std::string& curve_path,
              std::ostream& out) {
  const Dataset data = load_dataset(labels, features);
  WorkbenchConfig config = read_config(config_path);
  overrides.apply(config);
  TrainedModel model = train_on_split(data, config);
  save_checkpoint({model.state.encoder, config, model.state.epochs_completed}, checkpoint_path);
  write_curve(model.state.loss_curve, curve_path);
  out << nlohmann::json{{"checkpoint", checkpoint_path},
                        {"loss_curve", curve_path},
                        {"epochs", model.state.epochs_completed},
                        {"first_epoch_loss", model.state.loss_curve.front()},
                        {"final_epoch_loss", model.state.loss_curve.back()}}
             .dump(2)
      << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& labels, const std::string& features,
             const std::string& split, std::optional<std::size_t> k_map, std::optional<std::size_t> k_ndcg,
             const std::string& out_path, std::ostream& out) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  const Dataset data = load_dataset(labels, features);
  if (k_map) ck.config.k_map = *k_map;
  if (k_ndcg) ck.config.k_ndcg = *k_ndcg;
  const MetricReport report = evaluate_split(ck.encoder, data, ck.config, split);
  const std::string text = serialize(report) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write " + out_path);
    f << text;
  }
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& options, double tolerance, std::ostream& out) {
  const GradcheckResult r = run_gradcheck(options);
  const bool ok = r.max_relative_error <= tolerance;
  out << nlohmann::json{{"trials", r.trials},
                        {"anchors_checked", r.anchors_checked},
                        {"max_relative_error", r.max_relative_error},
                        {"max_decomposition_error", r.max_decomposition_error},
                        {"tolerance", tolerance},
                        {"pass", ok}}
             .dump(2)
      << '\n';
  return ok ? kExitOk : kExitFailure;
}

int cmd_sweep(const std::string& param, const std::vector<double>& values, const std::string& config_path,
              const std::string& labels, const std::string& features, const std::vector<std::string>& variants,
              const TrainOverrides& overrides, const std::string& out_path, std::ostream& out) {
  const Dataset data = load_dataset(labels, features);
  WorkbenchConfig base = read_config(config_path);
  overrides.apply(base);

  std::vector<LossVariant> bundle;
  for (const auto& v : variants) bundle.push_back(parse_loss_variant(v));
  if (bundle.empty()) bundle.push_back(base.train.loss.variant);

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "param,value,variant,final_loss,map_sim_at_k,ndcg_sim_at_k,map_easy,map_medium,map_hard,"
         "ndcg_jaccard_at_k,wap_at_k\n";
  for (double value : sorted) {
    for (LossVariant variant : bundle) {
      WorkbenchConfig c = base;
      c.train.loss.variant = variant;
      if (param == "alpha") c.train.loss.alpha = value;
      else if (param == "beta") c.train.loss.beta = value;
      else if (param == "tau") c.train.loss.tau = value;
      else c.train.learning_rate = value;
      c.train.validate();
      const TrainedModel model = train_on_split(data, c);
      const MetricReport r = evaluate_split(model.state.encoder, data, c, "test");
      csv << param << ',' << value << ',' << to_string(variant) << ',' << model.state.loss_curve.back() << ','
          << r.map_sim_at_k << ',' << r.ndcg_sim_at_k << ',' << r.map_easy << ',' << r.map_medium << ','
          << r.map_hard << ',' << r.ndcg_jaccard_at_k << ',' << r.wap_at_k << '\n';
    }
  }
  if (out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot write " + out_path);
    f << csv.str();
    out << "wrote " << out_path << '\n';
  }
  return kExitOk;
}

int cmd_synth(const std::string& spec_path, const std::string& prefix, std::ostream& out) {
  std::ifstream in(spec_path);
  if (!in) throw ParseError(spec_path, 0, 0, "cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(spec_path, 0, 0, e.what());
  }
  const SyntheticResult r = generate_synthetic(synthetic_spec_from_json(j));
  write_labels_csv(r.dataset, prefix + "labels.csv");
  write_features_csv(r.dataset, prefix + "features.csv");
  out << nlohmann::json{{"labels", prefix + "labels.csv"},
                        {"features", prefix + "features.csv"},
                        {"samples", r.dataset.size()},
                        {"draws", r.draws.draws},
                        {"rejected", r.draws.rejected}}
             .dump(2)
      << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label adaptive contrastive learning workbench", "macl"};
  app.require_subcommand(1);

  std::string labels, features, config_path, checkpoint, curve, out_path, split = "test", spec, prefix, param;
  std::size_t top = 10;
  std::optional<std::size_t> k_map, k_ndcg;
  std::vector<double> values;
  std::vector<std::string> variants;
  TrainOverrides overrides;
  GradcheckOptions grad;
  double tolerance = 1e-6;

  auto* stats = app.add_subcommand("stats", "Per-label counts and top pairwise intersection frequencies");
  stats->add_option("labels", labels, "Multi-hot labels CSV")->required()->check(CLI::ExistingFile);
  stats->add_option("--top", top, "Number of label pairs to list");

  auto* train_cmd = app.add_subcommand("train", "Train an encoder; writes a checkpoint and a loss-curve CSV");
  train_cmd->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--features", features)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", config_path)->check(CLI::ExistingFile);
  train_cmd->add_option("--checkpoint", checkpoint, "Output checkpoint path")->default_val("checkpoint.json");
  train_cmd->add_option("--curve", curve, "Output loss-curve CSV path")->default_val("loss_curve.csv");
  overrides.bind(*train_cmd);

  auto* eval = app.add_subcommand("eval", "Leave-one-out retrieval metrics for a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  eval->add_option("--features", features)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "Evaluated split")->check(CLI::IsMember({"train", "val", "test", "all"}));
  eval->add_option("--k-map", k_map);
  eval->add_option("--k-ndcg", k_ndcg);
  eval->add_option("--out", out_path, "Report path (stdout when omitted)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic versus finite-difference gradient suite");
  gradcheck->add_option("--trials", grad.trials);
  gradcheck->add_option("--seed", grad.seed);
  gradcheck->add_option("--tolerance", tolerance);

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate once per parameter value");
  sweep->add_option("--param", param)->required()->check(CLI::IsMember({"alpha", "beta", "tau", "lr"}));
  sweep->add_option("--values", values)->required()->delimiter(',');
  sweep->add_option("--config", config_path)->check(CLI::ExistingFile);
  sweep->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  sweep->add_option("--features", features)->required()->check(CLI::ExistingFile);
  sweep->add_option("--variants", variants, "Loss variants to compare per value")->delimiter(',');
  sweep->add_option("--out", out_path, "CSV path (stdout when omitted)");
  overrides.bind(*sweep);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic long-tailed multi-label dataset");
  synth->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
  synth->add_option("--out-prefix", prefix)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (stats->parsed()) return cmd_stats(labels, top, out);
    if (train_cmd->parsed()) return cmd_train(labels, features, config_path, overrides, checkpoint, curve, out);
    if (eval->parsed()) return cmd_eval(checkpoint, labels, features, split, k_map, k_ndcg, out_path, out);
    if (gradcheck->parsed()) return cmd_gradcheck(grad, tolerance, out);
    if (sweep->parsed()) {
      return cmd_sweep(param, values, config_path, labels, features, variants, overrides, out_path, out);
    }
    if (synth->parsed()) return cmd_synth(spec, prefix, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace macl::workbench
