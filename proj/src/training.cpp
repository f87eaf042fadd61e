#include "pad/training.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "pad/errors.hpp"

namespace pad {

void TrainConfig::validate() const {
  if (window_size < 2) throw ConfigError("window_size must be >= 2");
  if (poa_horizon == 0 || poa_horizon > window_size) {
    throw ConfigError("poa_horizon must lie in [1, window_size]");
  }
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (threads == 0) throw ConfigError("threads must be >= 1");
  solver.validate();
}

double loss_anomaly(double p_anomaly, int label) { return bce(label ? 1.0 : 0.0, p_anomaly); }

double loss_kd(double teacher, double student) { return bce(teacher, student); }

GroupSet substep_groups(SubStep step) {
  switch (step) {
    case SubStep::Anomaly:
      return {Group::F, Group::H, Group::A};
    case SubStep::Distill:
      return {Group::G, Group::Z, Group::P};
    case SubStep::Shared:
      return {Group::C};
  }
  return {};
}

LossAndGradients sharded_gradients(std::size_t n, const PadParameters& params, GroupSet trainable,
                                   std::size_t threads, const ShardLoss& loss) {
  if (n == 0) throw InputError("gradient of an empty batch");
  const std::size_t shards = std::clamp<std::size_t>(threads, 1, n);
  std::vector<LossAndGradients> partial(shards);
  std::vector<std::exception_ptr> errors(shards);

  auto run = [&](std::size_t s) {
    try {
      const std::size_t begin = n * s / shards, end = n * (s + 1) / shards;
      Tape tape;
      const BoundParameters bound = bind(tape, params, trainable);
      const Var l = loss(tape, bound, begin, end);
      tape.backward(l);
      LossAndGradients& out = partial[s];
      out.loss = l.value().item();
      for (Group g : kAllGroups) {
        const auto k = static_cast<std::size_t>(g);
        for (const Var& v : bound.vars[k]) {
          out.grads[k].push_back(trainable.contains(g) ? tape.grad(v) : Tensor::zeros_like(v.value()));
        }
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  };

  if (shards == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < shards; ++s) pool.emplace_back(run, s);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  LossAndGradients total = std::move(partial[0]);
  for (std::size_t s = 1; s < shards; ++s) {
    total.loss += partial[s].loss;
    add_into(total.grads, partial[s].grads);
  }
  return total;
}

namespace {

std::vector<const TimeSeriesWindow*> inputs_of(std::span<const BatchSample* const> batch,
                                               std::size_t begin, std::size_t end) {
  std::vector<const TimeSeriesWindow*> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(&batch[i]->input);
  return out;
}

Tensor column(std::span<const double> values, std::size_t begin, std::size_t end) {
  Tensor t(end - begin, 1);
  for (std::size_t i = begin; i < end; ++i) t(i - begin, 0) = values[i];
  return t;
}

}  // namespace

IterationLosses train_iteration(std::span<const BatchSample* const> batch, PadParameters& params,
                                AdamW& optimizer, const ModelConfig& model, const TrainConfig& config,
                                const SubStepObserver& observer) {
  if (batch.empty()) throw InputError("train_iteration on an empty batch");
  const std::size_t n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = batch[i]->label ? 1.0 : 0.0;

  auto anomaly_loss = [&](Tape& tape, const BoundParameters& bound, std::size_t b, std::size_t e) {
    const auto windows = inputs_of(batch, b, e);
    const BatchOutput out = forward_batch(tape, bound, windows, model, config.solver, {true, false});
    return ad::scale(ad::bce_mean(out.p_anomaly, column(labels, b, e)),
                     static_cast<double>(e - b) * inv_n);
  };

  IterationLosses losses;

  // (1) anomaly loss -> f, h, a
  {
    const GroupSet groups = substep_groups(SubStep::Anomaly);
    const LossAndGradients lg = sharded_gradients(n, params, groups, config.threads, anomaly_loss);
    losses.anomaly = lg.loss;
    optimizer.step(params, groups, lg.grads);
    if (observer) observer(SubStep::Anomaly, params);
  }

  // Teacher: anomaly branch on the upcoming observations, detached.
  std::vector<TimeSeriesWindow> teacher_windows;
  teacher_windows.reserve(n);
  for (const BatchSample* s : batch) teacher_windows.push_back(s->teacher);
  const std::vector<double> teacher =
      predict(teacher_windows, params, model, config.solver, n, {true, false}).p_anomaly;

  auto kd_loss = [&](Tape& tape, const BoundParameters& bound, std::size_t b, std::size_t e) {
    const auto windows = inputs_of(batch, b, e);
    const BatchOutput out = forward_batch(tape, bound, windows, model, config.solver, {false, true});
    return ad::scale(ad::bce_mean(out.p_poa, column(teacher, b, e)),
                     static_cast<double>(e - b) * inv_n);
  };

  // (2) distillation loss -> g, z, p
  {
    const GroupSet groups = substep_groups(SubStep::Distill);
    const LossAndGradients lg = sharded_gradients(n, params, groups, config.threads, kd_loss);
    losses.kd = lg.loss;
    optimizer.step(params, groups, lg.grads);
    if (observer) observer(SubStep::Distill, params);
  }

  // (3) both losses -> shared branch. Sub-step 2 left f, h, a untouched, so
  // the teacher targets above are still current.
  if (model.shared_branch) {
    auto joint = [&](Tape& tape, const BoundParameters& bound, std::size_t b, std::size_t e) {
      const auto windows = inputs_of(batch, b, e);
      const BatchOutput out = forward_batch(tape, bound, windows, model, config.solver);
      const Var la = ad::bce_mean(out.p_anomaly, column(labels, b, e));
      const Var lkd = ad::bce_mean(out.p_poa, column(teacher, b, e));
      return ad::scale(ad::add(la, lkd), static_cast<double>(e - b) * inv_n);
    };
    const GroupSet groups = substep_groups(SubStep::Shared);
    const LossAndGradients lg = sharded_gradients(n, params, groups, config.threads, joint);
    optimizer.step(params, groups, lg.grads);
  }
  if (observer) observer(SubStep::Shared, params);
  return losses;
}

ValidationScores evaluate_samples(std::span<const BatchSample> samples, const PadParameters& params,
                                  const ModelConfig& model, const SolverConfig& solver,
                                  double threshold) {
  if (samples.empty()) throw InputError("no windows to evaluate");
  std::vector<TimeSeriesWindow> inputs;
  std::vector<int> labels, poa_labels;
  for (const BatchSample& s : samples) {
    inputs.push_back(s.input);
    labels.push_back(s.label);
    poa_labels.push_back(s.poa_label);
  }
  const Prediction pred = predict(inputs, params, model, solver);
  return {evaluate(pred.p_anomaly, labels, threshold, Task::Anomaly),
          evaluate(pred.p_poa, poa_labels, threshold, Task::Poa)};
}

FitResult fit(std::span<const BatchSample> train, std::span<const BatchSample> validation,
              const PadParameters& initial, const ModelConfig& model, const TrainConfig& config,
              const EpochCallback& on_epoch) {
  config.validate();
  model.validate();
  if (train.empty()) throw InputError("empty training set");

  FitResult result;
  result.best = initial;
  result.best_epoch = 0;
  if (config.epochs == 0) return result;
  if (validation.empty()) throw InputError("empty validation set");

  PadParameters params = initial;
  AdamW optimizer(AdamConfig{config.learning_rate, config.weight_decay});
  double best = -std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(config.seed, epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double sum_a = 0.0, sum_kd = 0.0;
    std::size_t iterations = 0;
    std::vector<const BatchSample*> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&train[order[i]]);
      const IterationLosses l = train_iteration(batch, params, optimizer, model, config);
      sum_a += l.anomaly;
      sum_kd += l.kd;
      ++iterations;
    }

    const ValidationScores val = evaluate_samples(validation, params, model, config.solver, config.threshold);
    EpochLog log;
    log.epoch = epoch;
    log.loss_anomaly = sum_a / static_cast<double>(iterations);
    log.loss_kd = sum_kd / static_cast<double>(iterations);
    log.val_f1_anomaly = val.anomaly.f1;
    log.val_f1_poa = val.poa.f1;
    log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    result.history.push_back(log);
    if (val.score() > best) {
      best = val.score();
      result.best = params;
      result.best_epoch = epoch;
      result.best_score = best;
    }
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace pad
