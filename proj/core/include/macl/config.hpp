#pragma once

#include <filesystem>

#include <nlohmann/json_fwd.hpp>

#include "macl/dataset.hpp"
#include "macl/trainer.hpp"

namespace macl {

/// Flat JSON document mirroring TrainConfig and LossHyperparams field names.
/// Unknown keys are rejected; missing keys keep their defaults.
struct WorkbenchConfig {
  TrainConfig train;
  SplitRatios split;
  StatsOptions stats;
  std::size_t k_map = 5000;
  std::size_t k_ndcg = 100;
};

WorkbenchConfig config_from_json(const nlohmann::json& j, WorkbenchConfig base = {});
nlohmann::json to_json(const WorkbenchConfig& config);
WorkbenchConfig load_config(const std::filesystem::path& path);

}  // namespace macl
