#include <doctest.h>

#include <cmath>

#include "pad/errors.hpp"
#include "pad/training.hpp"

using namespace pad;

namespace {

ModelConfig toy_model() {
  ModelConfig m;
  m.n_channels = 2;
  m.hidden_dim = 4;
  m.width_f = m.width_g = m.width_c = 8;
  m.n_hidden_layers_f = m.n_hidden_layers_g = 1;
  m.n_hidden_layers_c = 1;
  return m;
}

TrainConfig toy_train() {
  TrainConfig t;
  t.epochs = 3;
  t.batch_size = 4;
  t.learning_rate = 1e-2;
  t.weight_decay = 1e-4;
  t.window_size = 6;
  t.poa_horizon = 3;
  t.solver = {Scheme::Rk4, 1, true};
  t.seed = 7;
  return t;
}

TimeSeriesWindow flat_window(std::size_t n, double level, double slope, std::size_t index, bool flagged) {
  TimeSeriesWindow w;
  w.window_index = index;
  w.values = Tensor(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    w.times.push_back(static_cast<double>(index * n + i));
    w.values(i, 0) = level + slope * static_cast<double>(i);
    w.values(i, 1) = level - 0.5 * slope * static_cast<double>(i);
  }
  w.anomaly_flags.assign(n, flagged);
  return w;
}

// Separable toy set: anomalous inputs sit high, normal ones low; the PoA
// label follows the teacher window.
std::vector<BatchSample> toy_samples(std::size_t count) {
  std::vector<BatchSample> out;
  for (std::size_t i = 0; i < count; ++i) {
    const bool anomalous = i % 2 == 0;
    const bool next = i % 3 == 0;
    BatchSample s;
    s.input = flat_window(6, anomalous ? 0.9 : 0.1, anomalous ? 0.05 : -0.02, i, anomalous);
    s.teacher = flat_window(3, next ? 0.9 : 0.1, 0.0, i + 1, next);
    s.label = anomalous;
    s.poa_label = next;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<const BatchSample*> pointers(const std::vector<BatchSample>& v) {
  std::vector<const BatchSample*> p;
  for (const auto& s : v) p.push_back(&s);
  return p;
}

}  // namespace

TEST_CASE("loss reference values") {
  CHECK(loss_anomaly(1.0 - kProbabilityEps, 1) < 1e-6);
  CHECK(loss_anomaly(0.5, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(loss_anomaly(0.25, 1) == doctest::Approx(1.38629).epsilon(1e-5));
  CHECK(loss_kd(0.5, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(loss_kd(0.8, 0.6) == doctest::Approx(0.59192).epsilon(1e-5));
  const double entropy = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
  CHECK(loss_kd(0.3, 0.3) == doctest::Approx(entropy).epsilon(1e-12));
  CHECK(loss_kd(0.3, 0.3) < loss_kd(0.3, 0.31));
  CHECK(loss_kd(0.3, 0.3) < loss_kd(0.3, 0.29));
}

TEST_CASE("sub-steps only touch their own groups") {
  const std::vector<BatchSample> samples = toy_samples(6);
  const auto batch = pointers(samples);
  PadParameters params = init_parameters(toy_model(), 3);
  TrainConfig cfg = toy_train();
  AdamW opt({cfg.learning_rate, cfg.weight_decay});

  for (int iter = 0; iter < 3; ++iter) {
    PadParameters before = params;
    int calls = 0;
    train_iteration(batch, params, opt, toy_model(), cfg, [&](SubStep step, const PadParameters& now) {
      ++calls;
      const GroupSet moved = substep_groups(step);
      for (Group g : kAllGroups) {
        if (!moved.contains(g)) CHECK(now.hash(g) == before.hash(g));
      }
      if (step == SubStep::Anomaly) {
        CHECK(now.hash(Group::G) == before.hash(Group::G));
        CHECK(now.hash(Group::F) != before.hash(Group::F));
      }
      if (step == SubStep::Distill) {
        CHECK(now.hash(Group::F) == before.hash(Group::F));
        CHECK(now.hash(Group::G) != before.hash(Group::G));
      }
      if (step == SubStep::Shared) CHECK(now.hash(Group::C) != before.hash(Group::C));
      before = now;
    });
    CHECK(calls == 3);
  }
}

TEST_CASE("zero learning rate keeps parameters bit-identical") {
  const std::vector<BatchSample> samples = toy_samples(4);
  PadParameters params = init_parameters(toy_model(), 3);
  const PadParameters before = params;
  TrainConfig cfg = toy_train();
  cfg.learning_rate = 0.0;
  AdamW opt({0.0, cfg.weight_decay});
  train_iteration(pointers(samples), params, opt, toy_model(), cfg);
  CHECK(params == before);
}

TEST_CASE("a separable toy batch is learned") {
  const std::vector<BatchSample> samples = toy_samples(8);
  const auto batch = pointers(samples);
  PadParameters params = init_parameters(toy_model(), 11);
  TrainConfig cfg = toy_train();
  AdamW opt({cfg.learning_rate, cfg.weight_decay});
  IterationLosses first, last;
  for (int i = 0; i < 200; ++i) {
    last = train_iteration(batch, params, opt, toy_model(), cfg);
    if (i == 0) first = last;
  }
  // Losses are measured before each update; one more measurement.
  last = train_iteration(batch, params, opt, toy_model(), cfg);
  CHECK(first.anomaly > 0.3);
  CHECK(last.anomaly < 0.1);
}

TEST_CASE("sharded gradients are deterministic and match one shard") {
  const std::vector<BatchSample> samples = toy_samples(7);
  const ModelConfig model = toy_model();
  const PadParameters params = init_parameters(model, 5);
  const ShardLoss loss = [&](Tape& tape, const BoundParameters& bound, std::size_t b, std::size_t e) {
    std::vector<const TimeSeriesWindow*> w;
    Tensor y(e - b, 1);
    for (std::size_t i = b; i < e; ++i) {
      w.push_back(&samples[i].input);
      y(i - b, 0) = samples[i].label;
    }
    const BatchOutput out = forward_batch(tape, bound, w, model, SolverConfig{Scheme::Rk4, 1, true});
    const double share = static_cast<double>(e - b) / static_cast<double>(samples.size());
    return ad::scale(ad::bce_mean(out.p_anomaly, y), share);
  };
  const auto one = sharded_gradients(samples.size(), params, GroupSet::all(), 1, loss);
  const auto three_a = sharded_gradients(samples.size(), params, GroupSet::all(), 3, loss);
  const auto three_b = sharded_gradients(samples.size(), params, GroupSet::all(), 3, loss);
  CHECK(three_a.loss == three_b.loss);
  CHECK(three_a.grads == three_b.grads);
  CHECK(three_a.loss == doctest::Approx(one.loss).epsilon(1e-12));
  for (std::size_t k = 0; k < kGroupCount; ++k)
    for (std::size_t t = 0; t < one.grads[k].size(); ++t)
      for (std::size_t i = 0; i < one.grads[k][t].size(); ++i)
        CHECK(three_a.grads[k][t][i] == doctest::Approx(one.grads[k][t][i]).epsilon(1e-10).scale(1e-12));
}

TEST_CASE("fit contracts") {
  const std::vector<BatchSample> train = toy_samples(8);
  const std::vector<BatchSample> val = toy_samples(4);
  const ModelConfig model = toy_model();
  const PadParameters init = init_parameters(model, 1);
  TrainConfig cfg = toy_train();

  SUBCASE("zero epochs returns the initial parameters") {
    cfg.epochs = 0;
    const FitResult r = fit(train, val, init, model, cfg);
    CHECK(r.best == init);
    CHECK(r.best_epoch == 0);
    CHECK(r.history.empty());
  }
  SUBCASE("same seed, same result") {
    const FitResult a = fit(train, val, init, model, cfg);
    const FitResult b = fit(train, val, init, model, cfg);
    CHECK(a.best == b.best);
    CHECK(a.history.size() == 3);
    CHECK(a.best_epoch == b.best_epoch);
  }
  SUBCASE("empty splits are rejected") {
    CHECK_THROWS_AS(fit({}, val, init, model, cfg), InputError);
    CHECK_THROWS_AS(fit(train, {}, init, model, cfg), InputError);
  }
}

TEST_CASE("training config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.poa_horizon = cfg.window_size + 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.validation_fraction = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
