#include "pad/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "pad/errors.hpp"

namespace pad {

std::vector<BatchSample> prepare_samples(const RawSequence& seq, const NormalizationStats& stats,
                                         std::size_t window_size, std::size_t horizon) {
  const RawSequence scaled = apply_normalization(seq, stats);
  const std::vector<TimeSeriesWindow> windows = window_split(scaled, window_size);
  return make_batch_samples(windows, horizon);
}

PreparedData prepare_data(const RawSequence& train, const RawSequence* test, const TrainConfig& config,
                          const AugmentSpec& augment) {
  config.validate();
  validate_sequence(train);
  PreparedData out;
  out.n_channels = train.n_channels();
  const RawSequence train_seqs[] = {train};
  out.stats = fit_normalization(train_seqs);

  RawSequence scaled = apply_normalization(train, out.stats);
  if (augment.gamma > 0.0) scaled = augment_with_trace(scaled, augment).sequence;
  const std::vector<TimeSeriesWindow> windows = window_split(scaled, config.window_size);
  std::vector<BatchSample> samples = make_batch_samples(windows, config.poa_horizon);
  if (samples.size() < 2) throw InputError("training sequence yields fewer than 2 windows");

  auto n_val = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(samples.size()));
  n_val = std::clamp<std::size_t>(n_val, 1, samples.size() - 1);
  const std::size_t n_train = samples.size() - n_val;
  out.train.assign(std::make_move_iterator(samples.begin()),
                   std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)));
  out.validation.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                        std::make_move_iterator(samples.end()));

  if (test) {
    if (test->n_channels() != out.n_channels) {
      throw DimensionError("train and test sequences have different channel counts");
    }
    out.test = prepare_samples(*test, out.stats, config.window_size, config.poa_horizon);
  }
  return out;
}

std::vector<BatchSample> drop_inputs(std::span<const BatchSample> samples, double ratio,
                                     std::uint64_t seed) {
  std::vector<BatchSample> out(samples.begin(), samples.end());
  if (ratio == 0.0) return out;
  for (BatchSample& s : out) {
    s.input = drop_observations(s.input, ratio, derive_seed(seed, s.input.window_index));
    s.label = s.input.label();
  }
  return out;
}

BenchmarkResult run_synthetic_benchmark(const BenchmarkConfig& config, std::uint64_t seed,
                                        const EpochCallback& on_epoch) {
  const auto started = std::chrono::steady_clock::now();
  SyntheticConfig synth = config.synthetic;
  synth.seed = derive_seed(seed, 1);
  const RawSequence full = generate_synthetic(synth);
  const auto [train_raw, test_raw] = split_sequence(full, config.train_fraction);

  TrainConfig train_cfg = config.train;
  train_cfg.seed = derive_seed(seed, 3);
  AugmentSpec aug = config.augment;
  aug.seed = derive_seed(seed, 4);
  const PreparedData data = prepare_data(train_raw, &test_raw, train_cfg, aug);

  ModelConfig model = config.model;
  model.n_channels = data.n_channels;
  const PadParameters init = init_parameters(model, derive_seed(seed, 2));

  BenchmarkResult result;
  result.fit = fit(data.train, data.validation, init, model, train_cfg, on_epoch);
  for (double ratio : config.drop_ratios) {
    const std::vector<BatchSample> test = drop_inputs(data.test, ratio, derive_seed(seed, 5));
    result.drops.push_back(
        {ratio, evaluate_samples(test, result.fit.best, model, train_cfg.solver, train_cfg.threshold)});
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

BenchmarkConfig default_benchmark_config() {
  BenchmarkConfig cfg;
  cfg.synthetic.length = 20000;
  cfg.synthetic.n_channels = 4;
  cfg.synthetic.anomaly_count = 24;
  cfg.synthetic.precursor_len = 40;

  cfg.model.n_channels = 4;
  cfg.model.hidden_dim = 8;
  cfg.model.width_f = 16;
  cfg.model.width_g = 16;
  cfg.model.width_c = 16;
  cfg.model.n_hidden_layers_f = 2;
  cfg.model.n_hidden_layers_g = 2;
  cfg.model.n_hidden_layers_c = 1;

  cfg.train.epochs = 30;
  cfg.train.batch_size = 32;
  cfg.train.learning_rate = 1e-2;
  cfg.train.weight_decay = 1e-4;
  cfg.train.window_size = 30;
  cfg.train.poa_horizon = 10;
  // One RK4 step per unit of time on a full window; the grid stays fixed
  // when observations are dropped.
  cfg.train.solver.scheme = Scheme::Rk4;
  cfg.train.solver.steps_per_window = cfg.train.window_size - 1;
  cfg.train.solver.knot_aligned = false;
  cfg.augment.gamma = 0.0;
  return cfg;
}

}  // namespace pad
