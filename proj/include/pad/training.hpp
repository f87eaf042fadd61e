#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pad/data.hpp"
#include "pad/metrics.hpp"
#include "pad/model.hpp"
#include "pad/optimizer.hpp"

namespace pad {

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 256;
  double learning_rate = 1e-2;
  double weight_decay = 1e-4;
  std::size_t window_size = 30;  // b
  std::size_t poa_horizon = 10;  // p
  SolverConfig solver;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  double validation_fraction = 0.2;
  std::size_t threads = 1;

  void validate() const;
};

// Cross-entropy against the ground-truth window label.
double loss_anomaly(double p_anomaly, int label);
// Cross-entropy of the student against the (constant) teacher probability.
double loss_kd(double teacher, double student);

struct IterationLosses {
  double anomaly = 0.0;  // batch-mean L_a before sub-step 1
  double kd = 0.0;       // batch-mean L_KD before sub-step 2
};

enum class SubStep { Anomaly = 1, Distill = 2, Shared = 3 };
// Called after each sub-step's update.
using SubStepObserver = std::function<void(SubStep, const PadParameters&)>;

// Parameter groups each sub-step updates.
GroupSet substep_groups(SubStep step);

// One multi-task iteration:
//   1. L_a on the inputs updates f, h, a
//   2. the anomaly branch on the teacher windows gives detached soft targets;
//      L_KD of the PoA branch on the inputs updates g, z, p
//   3. L_a + L_KD updates the shared branch c (skipped without one)
IterationLosses train_iteration(std::span<const BatchSample* const> batch, PadParameters& params,
                                AdamW& optimizer, const ModelConfig& model, const TrainConfig& config,
                                const SubStepObserver& observer = {});

struct LossAndGradients {
  double loss = 0.0;
  Gradients grads;
};

// Loss over items [0, n) with gradients for `trainable`. Items are split into
// contiguous shards, one tape per thread, reduced in shard order. The shard
// callback returns its share of the loss for items [begin, end).
using ShardLoss =
    std::function<Var(Tape&, const BoundParameters&, std::size_t begin, std::size_t end)>;
LossAndGradients sharded_gradients(std::size_t n, const PadParameters& params, GroupSet trainable,
                                   std::size_t threads, const ShardLoss& loss);

struct ValidationScores {
  EvalReport anomaly;
  EvalReport poa;
  double score() const { return anomaly.f1 + poa.f1; }
};

ValidationScores evaluate_samples(std::span<const BatchSample> samples, const PadParameters& params,
                                  const ModelConfig& model, const SolverConfig& solver,
                                  double threshold);

struct EpochLog {
  std::size_t epoch = 0;
  double loss_anomaly = 0.0;
  double loss_kd = 0.0;
  double val_f1_anomaly = 0.0;
  double val_f1_poa = 0.0;
  double wall_ms = 0.0;
};

struct FitResult {
  PadParameters best;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_score = 0.0;
  std::vector<EpochLog> history;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Runs config.epochs passes and keeps the snapshot with the best summed
// validation F1 (earliest wins ties).
FitResult fit(std::span<const BatchSample> train, std::span<const BatchSample> validation,
              const PadParameters& initial, const ModelConfig& model, const TrainConfig& config,
              const EpochCallback& on_epoch = {});

}  // namespace pad
