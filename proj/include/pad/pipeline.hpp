#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pad/data.hpp"
#include "pad/training.hpp"

namespace pad {

struct PreparedData {
  std::vector<BatchSample> train;
  std::vector<BatchSample> validation;
  std::vector<BatchSample> test;
  NormalizationStats stats;
  std::size_t n_channels = 0;
};

// Normalizes with training statistics, augments the training sequence when
// augment.gamma > 0, windows both sequences, and holds out the last
// validation_fraction of the training samples.
PreparedData prepare_data(const RawSequence& train, const RawSequence* test, const TrainConfig& config,
                          const AugmentSpec& augment);

// Windows a sequence with already-fitted statistics (inference on new data).
std::vector<BatchSample> prepare_samples(const RawSequence& seq, const NormalizationStats& stats,
                                         std::size_t window_size, std::size_t horizon);

// Removes observations from every input window. Anomaly labels follow the
// surviving flags; PoA labels are properties of the future and stay.
std::vector<BatchSample> drop_inputs(std::span<const BatchSample> samples, double ratio,
                                     std::uint64_t seed);

struct BenchmarkConfig {
  SyntheticConfig synthetic;
  double train_fraction = 0.7;
  ModelConfig model;
  TrainConfig train;
  AugmentSpec augment;
  std::vector<double> drop_ratios = {0.0};
};

struct DropResult {
  double ratio = 0.0;
  ValidationScores test;
};

struct BenchmarkResult {
  FitResult fit;
  std::vector<DropResult> drops;
  double wall_seconds = 0.0;
};

// Desk-scale analog of a full experiment: synthesize, split chronologically,
// train, and evaluate on the held-out tail at each drop ratio. Every seed
// is derived from `seed`.
BenchmarkResult run_synthetic_benchmark(const BenchmarkConfig& config, std::uint64_t seed,
                                        const EpochCallback& on_epoch = {});

// Model and training defaults sized for the synthetic benchmark on one core.
BenchmarkConfig default_benchmark_config();

}  // namespace pad
