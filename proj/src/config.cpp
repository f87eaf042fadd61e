#include "pad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pad/errors.hpp"

namespace pad {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + path_ + "." + key + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  s.read("n_channels", m.n_channels);
  s.read("hidden_dim", m.hidden_dim);
  s.read("width_f", m.width_f);
  s.read("width_g", m.width_g);
  s.read("width_c", m.width_c);
  s.read("n_hidden_layers_f", m.n_hidden_layers_f);
  s.read("n_hidden_layers_g", m.n_hidden_layers_g);
  s.read("n_hidden_layers_c", m.n_hidden_layers_c);
  s.read("shared_branch", m.shared_branch);
  s.read("append_time", m.append_time);
  s.finish();
}

void read_solver(const json& j, SolverConfig& c) {
  Section s(j, "solver");
  std::string scheme = to_string(c.scheme);
  s.read("scheme", scheme);
  c.scheme = parse_scheme(scheme);
  s.read("steps_per_window", c.steps_per_window);
  s.read("knot_aligned", c.knot_aligned);
  s.finish();
}

json solver_json(const SolverConfig& c) {
  return {{"scheme", to_string(c.scheme)}, {"steps_per_window", c.steps_per_window},
          {"knot_aligned", c.knot_aligned}};
}

}  // namespace

json to_json(const ModelConfig& m) {
  return {{"n_channels", m.n_channels},
          {"hidden_dim", m.hidden_dim},
          {"width_f", m.width_f},
          {"width_g", m.width_g},
          {"width_c", m.width_c},
          {"n_hidden_layers_f", m.n_hidden_layers_f},
          {"n_hidden_layers_g", m.n_hidden_layers_g},
          {"n_hidden_layers_c", m.n_hidden_layers_c},
          {"shared_branch", m.shared_branch},
          {"append_time", m.append_time}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  read_model(j, m);
  return m;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "config");
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);
  if (const json* m = root.child("model")) read_model(*m, c.model);
  if (const json* sv = root.child("solver")) read_solver(*sv, c.train.solver);
  if (const json* t = root.child("train")) {
    Section s(*t, "train");
    s.read("epochs", c.train.epochs);
    s.read("batch_size", c.train.batch_size);
    s.read("learning_rate", c.train.learning_rate);
    s.read("weight_decay", c.train.weight_decay);
    s.read("window_size", c.train.window_size);
    s.read("poa_horizon", c.train.poa_horizon);
    s.read("threshold", c.train.threshold);
    s.read("validation_fraction", c.train.validation_fraction);
    s.read("threads", c.train.threads);
    s.finish();
  }
  if (const json* a = root.child("augment")) {
    Section s(*a, "augment");
    s.read("gamma", c.augment.gamma);
    s.read("min_len", c.augment.min_len);
    s.read("max_len", c.augment.max_len);
    s.finish();
  }
  if (const json* y = root.child("synthetic")) {
    Section s(*y, "synthetic");
    s.read("length", c.synthetic.length);
    s.read("n_channels", c.synthetic.n_channels);
    s.read("anomaly_count", c.synthetic.anomaly_count);
    s.read("precursor_len", c.synthetic.precursor_len);
    s.read("min_len", c.synthetic.min_len);
    s.read("max_len", c.synthetic.max_len);
    s.read("anomaly_ratio", c.synthetic.anomaly_ratio);
    s.read("train_fraction", c.train_fraction);
    s.finish();
  }
  if (const json* d = root.child("data")) {
    Section s(*d, "data");
    s.read("train", c.train_path);
    s.read("test", c.test_path);
    s.finish();
  }
  if (const json* sw = root.child("sweep")) {
    Section s(*sw, "sweep");
    s.read("horizons", c.sweep_horizons);
    s.finish();
  }
  if (const json* e = root.child("eval")) {
    Section s(*e, "eval");
    s.read("drop", c.drop_ratios);
    s.finish();
  }
  root.finish();

  c.model.validate();
  c.train.validate();
  c.augment.validate();
  return c;
}

json to_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"output_dir", c.output_dir},
          {"model", to_json(c.model)},
          {"solver", solver_json(c.train.solver)},
          {"train",
           {{"epochs", c.train.epochs},
            {"batch_size", c.train.batch_size},
            {"learning_rate", c.train.learning_rate},
            {"weight_decay", c.train.weight_decay},
            {"window_size", c.train.window_size},
            {"poa_horizon", c.train.poa_horizon},
            {"threshold", c.train.threshold},
            {"validation_fraction", c.train.validation_fraction},
            {"threads", c.train.threads}}},
          {"augment", {{"gamma", c.augment.gamma}, {"min_len", c.augment.min_len}, {"max_len", c.augment.max_len}}},
          {"synthetic",
           {{"length", c.synthetic.length},
            {"n_channels", c.synthetic.n_channels},
            {"anomaly_count", c.synthetic.anomaly_count},
            {"precursor_len", c.synthetic.precursor_len},
            {"min_len", c.synthetic.min_len},
            {"max_len", c.synthetic.max_len},
            {"anomaly_ratio", c.synthetic.anomaly_ratio},
            {"train_fraction", c.train_fraction}}},
          {"data", {{"train", c.train_path}, {"test", c.test_path}}},
          {"sweep", {{"horizons", c.sweep_horizons}}},
          {"eval", {{"drop", c.drop_ratios}}}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

json checkpoint_to_json(const Checkpoint& cp) {
  json groups = json::object();
  for (Group g : kAllGroups) {
    json list = json::array();
    for (const Tensor& t : cp.params[g]) {
      list.push_back({{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}});
    }
    groups[std::string(group_name(g))] = std::move(list);
  }
  json j = {{"format", "pad-checkpoint"},
            {"version", kCheckpointVersion},
            {"model", to_json(cp.model)},
            {"groups", std::move(groups)}};
  if (cp.stats) j["normalization"] = {{"min", cp.stats->min}, {"max", cp.stats->max}};
  if (!cp.config.is_null()) j["config"] = cp.config;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format") != "pad-checkpoint") throw InputError("not a pad checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw InputError("unsupported checkpoint version " + j.at("version").dump());
    }
    Checkpoint cp;
    cp.model = model_config_from_json(j.at("model"));
    for (const auto& [name, list] : j.at("groups").items()) {
      auto& group = cp.params[parse_group(name)];
      for (const json& t : list) {
        group.emplace_back(t.at("shape").get<std::vector<std::size_t>>(),
                           t.at("data").get<std::vector<double>>());
      }
    }
    if (j.contains("normalization")) {
      cp.stats = NormalizationStats{j["normalization"].at("min").get<std::vector<double>>(),
                                    j["normalization"].at("max").get<std::vector<double>>()};
    }
    if (j.contains("config")) cp.config = j["config"];
    return cp;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << checkpoint_to_json(checkpoint).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  try {
    return checkpoint_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError("invalid checkpoint JSON: " + std::string(e.what()));
  }
}

json to_json(const EpochLog& log) {
  return {{"epoch", log.epoch},           {"L_a", log.loss_anomaly},
          {"L_KD", log.loss_kd},          {"val_f1_anomaly", log.val_f1_anomaly},
          {"val_f1_poa", log.val_f1_poa}, {"wall_ms", log.wall_ms}};
}

}  // namespace pad
