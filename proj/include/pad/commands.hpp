#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pad/config.hpp"
#include "pad/gradcheck.hpp"
#include "pad/pipeline.hpp"

namespace pad {

// Line-oriented JSON sink for progress messages.
using LogSink = std::function<void(const nlohmann::json&)>;

// Train/test sequences named by the config: CSV files when data.train is
// set, otherwise a chronological split of the synthetic generator.
struct DataSource {
  RawSequence train;
  std::optional<RawSequence> test;
};
DataSource resolve_data(const RunConfig& config);

// Each command writes its artifacts under `out` (created if missing) and
// returns the JSON it wrote as its main report. Reports hold no timestamps,
// so identical inputs give identical bytes.
nlohmann::json cmd_synth(const RunConfig& config, const std::filesystem::path& out);

nlohmann::json cmd_augment(const std::filesystem::path& input, const RunConfig& config,
                           const std::filesystem::path& out);

// Writes checkpoint.json, train.json and train_log.jsonl.
nlohmann::json cmd_train(const RunConfig& config, const std::filesystem::path& out,
                         const LogSink& log = {});

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> data;  // labeled CSV; default from config
  std::optional<std::vector<double>> drop;    // default config.drop_ratios
  std::optional<double> threshold;            // default config.train.threshold
};
// Writes eval.json.
nlohmann::json cmd_eval(const RunConfig& config, const EvalOptions& options,
                        const std::filesystem::path& out);

nlohmann::json to_json(const GradCheckReport& report);
// Writes gradcheck.json; report["passed"] tells the outcome.
nlohmann::json cmd_gradcheck(const RunConfig& config, const std::filesystem::path& out);

// Retrains for every horizon in config.sweep_horizons and writes sweep.csv
// with columns p,poa_f1 plus sweep.json.
nlohmann::json cmd_sweep(const RunConfig& config, const std::filesystem::path& out,
                         const LogSink& log = {});

}  // namespace pad
