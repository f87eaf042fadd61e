#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pad/commands.hpp"
#include "pad/errors.hpp"

using namespace pad;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.seed = 4;
  c.model.hidden_dim = 4;
  c.model.width_f = c.model.width_g = c.model.width_c = 8;
  c.model.n_hidden_layers_f = c.model.n_hidden_layers_g = 1;
  c.train.epochs = 1;
  c.train.batch_size = 16;
  c.train.window_size = 20;
  c.train.poa_horizon = 5;
  c.train.solver = {Scheme::Rk4, 1, true};
  c.synthetic.length = 3000;
  c.synthetic.n_channels = 2;
  c.synthetic.anomaly_count = 3;
  c.synthetic.precursor_len = 20;
  c.sweep_horizons = {1, 5, 10, 15, 20};
  c.drop_ratios = {0.0, 0.5};
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pad_cmd_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("zero epochs writes the initialization") {
  RunConfig c = small_config();
  c.train.epochs = 0;
  const fs::path out = scratch("init");
  cmd_train(c, out);
  const Checkpoint cp = load_checkpoint(out / "checkpoint.json");
  ModelConfig m = c.model;
  m.n_channels = 2;
  CHECK(cp.params == init_parameters(m, derive_seed(c.seed, 2)));
  CHECK(cp.config == to_json(c));
  fs::remove_all(out);
}

TEST_CASE("train then eval is reproducible") {
  const RunConfig c = small_config();
  const fs::path out = scratch("repro");
  cmd_train(c, out);
  EvalOptions opt;
  opt.checkpoint = out / "checkpoint.json";
  const nlohmann::json first = cmd_eval(c, opt, out);
  const std::string bytes = slurp(out / "eval.json");
  cmd_train(c, out);
  const nlohmann::json second = cmd_eval(c, opt, out);
  CHECK(first == second);
  CHECK(slurp(out / "eval.json") == bytes);
  CHECK(first["results"].size() == 2);
  CHECK(fs::exists(out / "train_log.jsonl"));
  fs::remove_all(out);
}

TEST_CASE("sweep emits one row per horizon") {
  const RunConfig c = small_config();
  const fs::path out = scratch("sweep");
  cmd_sweep(c, out);
  std::ifstream in(out / "sweep.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "p,poa_f1");
  CHECK(lines[1].rfind("1,", 0) == 0);
  CHECK(lines[5].rfind("20,", 0) == 0);
  fs::remove_all(out);
}

TEST_CASE("synth and augment artifacts") {
  RunConfig c = small_config();
  const fs::path out = scratch("synth");
  const nlohmann::json s = cmd_synth(c, out);
  CHECK(s["anomalies"].size() == 3);
  const RawSequence train = load_csv(out / "train.csv");
  CHECK(train.length() == 2100);

  // Augmentation takes unlabeled data.
  RawSequence clean = train;
  clean.anomaly_flags.clear();
  save_csv(clean, out / "clean.csv");
  c.augment.gamma = 0.1;
  const nlohmann::json a = cmd_augment(out / "clean.csv", c, out / "aug");
  CHECK(a["anomaly_ratio"].get<double>() > 0.1);
  CHECK(load_csv(out / "aug" / "augmented.csv").flagged_count() > 210);
  CHECK_THROWS_AS(cmd_augment(out / "train.csv", c, out / "aug2"), InputError);
  fs::remove_all(out);
}

TEST_CASE("gradcheck command passes") {
  const fs::path out = scratch("grad");
  const nlohmann::json r = cmd_gradcheck(small_config(), out);
  CHECK(r["passed"].get<bool>());
  CHECK(r["max_rel_err"].get<double>() <= 1e-4);
  fs::remove_all(out);
}

TEST_CASE("missing data is reported") {
  RunConfig c = small_config();
  c.train_path = "/nonexistent/train.csv";
  CHECK_THROWS_AS(cmd_train(c, scratch("missing")), InputError);
  c.train_path.clear();
  c.test_path = "/nonexistent/test.csv";
  CHECK_THROWS_AS(resolve_data(c), ConfigError);
}
