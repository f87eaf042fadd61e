#include <doctest.h>

#include <filesystem>

#include "pad/config.hpp"
#include "pad/errors.hpp"

using namespace pad;
using nlohmann::json;

TEST_CASE("defaults round-trip through JSON") {
  RunConfig c;
  c.seed = 42;
  c.model.hidden_dim = 5;
  c.train.solver.scheme = Scheme::Euler;
  c.sweep_horizons = {1, 5};
  const RunConfig back = run_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.train.solver.scheme == Scheme::Euler);
}

TEST_CASE("partial configs keep defaults") {
  const RunConfig c = run_config_from_json(json::parse(R"({"train": {"epochs": 3}, "solver": {"scheme": "euler"}})"));
  CHECK(c.train.epochs == 3);
  CHECK(c.train.batch_size == TrainConfig{}.batch_size);
  CHECK(c.train.solver.scheme == Scheme::Euler);
  CHECK(c.train.solver.steps_per_window == SolverConfig{}.steps_per_window);
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"epochs": 3})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"train": {"epoch": 3}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"model": {"hidden_dim": "big"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"solver": {"scheme": "dopri5"}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"({"train": {"poa_horizon": 40}})")), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json::parse(R"([1, 2])")), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  ModelConfig m;
  m.n_channels = 3;
  m.hidden_dim = 4;
  m.width_f = m.width_g = m.width_c = 6;
  m.n_hidden_layers_f = m.n_hidden_layers_g = 2;
  Checkpoint cp{m, init_parameters(m, 99), NormalizationStats{{0.1, -2.0, 0.0}, {1.0 / 3.0, 5.0, 1e-300}},
                json{{"seed", 1}}};
  cp.params[Group::F][0][0] = 0.1 + 0.2;
  const auto path = std::filesystem::temp_directory_path() / "pad_checkpoint_test.json";
  save_checkpoint(cp, path);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(back.params == cp.params);
  CHECK(back.stats->min == cp.stats->min);
  CHECK(back.stats->max == cp.stats->max);
  CHECK(to_json(back.model) == to_json(m));
  CHECK(back.config == cp.config);
}

TEST_CASE("malformed checkpoints") {
  CHECK_THROWS_AS(checkpoint_from_json(json{{"format", "other"}}), InputError);
  CHECK_THROWS_AS(checkpoint_from_json(json{{"format", "pad-checkpoint"}, {"version", 99}}), InputError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/cp.json"), InputError);
}
