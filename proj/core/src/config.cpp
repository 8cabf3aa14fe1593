#include "macl/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "macl/error.hpp"

namespace macl {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "epochs",         "batch_size",    "learning_rate",  "weight_decay",  "clip_max_norm",
      "seed",           "alpha",         "beta",           "epsilon",       "tau",
      "variant",        "pair_weighting", "dynamic_temperature", "include_self", "schedule",
      "schedule_window_epochs", "schedule_window_decay", "augment", "augment_sigma", "hidden_dim",
      "output_dim",     "split_train",   "split_val",      "split_test",    "cooccurrence",
      "rarity",         "k_map",         "k_ndcg"};
  return keys;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

WorkbenchConfig config_from_json(const nlohmann::json& j, WorkbenchConfig c) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw Error("unknown config key '" + key + "'");
  }
  try {
    TrainConfig& t = c.train;
    read(j, "epochs", t.epochs);
    read(j, "batch_size", t.batch_size);
    read(j, "learning_rate", t.learning_rate);
    read(j, "weight_decay", t.weight_decay);
    read(j, "clip_max_norm", t.clip_max_norm);
    read(j, "seed", t.seed);
    read(j, "alpha", t.loss.alpha);
    read(j, "beta", t.loss.beta);
    read(j, "epsilon", t.loss.epsilon);
    read(j, "tau", t.loss.tau);
    if (j.contains("variant")) t.loss.variant = parse_loss_variant(j.at("variant").get<std::string>());
    read(j, "pair_weighting", t.loss.pair_weighting);
    read(j, "dynamic_temperature", t.loss.dynamic_temperature);
    read(j, "include_self", t.loss.include_self);
    if (j.contains("schedule")) {
      const auto s = j.at("schedule").get<std::string>();
      if (s == "cosine_windows") {
        t.schedule.kind = LrSchedule::Kind::kCosineWindows;
      } else if (s == "constant") {
        t.schedule.kind = LrSchedule::Kind::kConstant;
      } else {
        throw Error("unknown schedule '" + s + "' (expected cosine_windows or constant)");
      }
    }
    read(j, "schedule_window_epochs", t.schedule.window_epochs);
    read(j, "schedule_window_decay", t.schedule.window_decay);
    read(j, "augment", t.augment.enabled);
    read(j, "augment_sigma", t.augment.noise_sigma);
    if (j.contains("hidden_dim")) {
      const auto& h = j.at("hidden_dim");
      t.hidden_dim = h.is_null() ? std::nullopt : std::optional<std::size_t>(h.get<std::size_t>());
    }
    read(j, "output_dim", t.output_dim);
    read(j, "split_train", c.split.train);
    read(j, "split_val", c.split.val);
    read(j, "split_test", c.split.test);
    if (j.contains("cooccurrence")) {
      const auto s = j.at("cooccurrence").get<std::string>();
      if (s == "contains") {
        c.stats.cooccurrence = CooccurrenceMode::kContainsIntersection;
      } else if (s == "exact") {
        c.stats.cooccurrence = CooccurrenceMode::kExactIntersection;
      } else {
        throw Error("unknown cooccurrence mode '" + s + "' (expected contains or exact)");
      }
    }
    if (j.contains("rarity")) {
      const auto s = j.at("rarity").get<std::string>();
      if (s == "min") {
        c.stats.rarity = RarityMode::kMin;
      } else if (s == "mean") {
        c.stats.rarity = RarityMode::kMean;
      } else if (s == "sum") {
        c.stats.rarity = RarityMode::kSum;
      } else {
        throw Error("unknown rarity mode '" + s + "' (expected min, mean or sum)");
      }
    }
    read(j, "k_map", c.k_map);
    read(j, "k_ndcg", c.k_ndcg);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  c.train.validate();
  return c;
}

nlohmann::json to_json(const WorkbenchConfig& c) {
  const TrainConfig& t = c.train;
  nlohmann::json j{
      {"epochs", t.epochs},
      {"batch_size", t.batch_size},
      {"learning_rate", t.learning_rate},
      {"weight_decay", t.weight_decay},
      {"clip_max_norm", t.clip_max_norm},
      {"seed", t.seed},
      {"alpha", t.loss.alpha},
      {"beta", t.loss.beta},
      {"epsilon", t.loss.epsilon},
      {"tau", t.loss.tau},
      {"variant", std::string(to_string(t.loss.variant))},
      {"pair_weighting", t.loss.pair_weighting},
      {"dynamic_temperature", t.loss.dynamic_temperature},
      {"include_self", t.loss.include_self},
      {"schedule", t.schedule.kind == LrSchedule::Kind::kCosineWindows ? "cosine_windows" : "constant"},
      {"schedule_window_epochs", t.schedule.window_epochs},
      {"schedule_window_decay", t.schedule.window_decay},
      {"augment", t.augment.enabled},
      {"augment_sigma", t.augment.noise_sigma},
      {"output_dim", t.output_dim},
      {"split_train", c.split.train},
      {"split_val", c.split.val},
      {"split_test", c.split.test},
      {"cooccurrence", c.stats.cooccurrence == CooccurrenceMode::kContainsIntersection ? "contains" : "exact"},
      {"rarity", c.stats.rarity == RarityMode::kMin ? "min" : c.stats.rarity == RarityMode::kMean ? "mean" : "sum"},
      {"k_map", c.k_map},
      {"k_ndcg", c.k_ndcg},
  };
  j["hidden_dim"] = t.hidden_dim ? nlohmann::json(*t.hidden_dim) : nlohmann::json(nullptr);
  return j;
}

WorkbenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, 0, e.what());
  }
  return config_from_json(j);
}

}  // namespace macl
