#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/data.hpp"
#include "pad/model.hpp"
#include "pad/training.hpp"

namespace pad {

// Everything a CLI command needs. JSON layout:
//   { "seed", "output_dir", "model": {...}, "solver": {...}, "train": {...},
//     "augment": {...}, "synthetic": {...}, "data": {"train", "test"},
//     "sweep": {"horizons": [...]}, "eval": {"drop": [...]} }
// Unknown keys anywhere are rejected with ConfigError.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;  // train.solver holds the "solver" section
  AugmentSpec augment;
  SyntheticConfig synthetic;
  double train_fraction = 0.7;  // chronological split of synthetic data
  std::string train_path;
  std::string test_path;
  std::uint64_t seed = 0;
  std::string output_dir = "pad_out";
  std::vector<std::size_t> sweep_horizons = {1, 5, 10, 15, 20};
  std::vector<double> drop_ratios = {0.0, 0.3, 0.5, 0.7};
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const ModelConfig& model);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Parameter checkpoint: versioned JSON mapping group -> list of {shape, data}.
// Doubles are written in shortest round-trip form, so reloading is bit-exact.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig model;
  PadParameters params;
  std::optional<NormalizationStats> stats;
  nlohmann::json config;  // run config snapshot, null when absent
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const EpochLog& log);

}  // namespace pad
