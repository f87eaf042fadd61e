#include "pad/commands.hpp"

#include <cstdio>
#include <fstream>

#include "pad/errors.hpp"

namespace pad {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

SyntheticConfig seeded_synthetic(const RunConfig& config) {
  SyntheticConfig s = config.synthetic;
  s.seed = derive_seed(config.seed, 1);
  return s;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json parameter_hashes(const PadParameters& params) {
  json j = json::object();
  for (Group g : kAllGroups) j[std::string(group_name(g))] = hex(params.hash(g));
  return j;
}

json epoch_record(const EpochLog& log) {
  json j = to_json(log);
  j.erase("wall_ms");
  return j;
}

struct TrainedModel {
  ModelConfig model;
  FitResult fit;
  PreparedData data;
};

TrainedModel train_model(const RunConfig& config, const DataSource& source, const EpochCallback& on_epoch) {
  TrainConfig train = config.train;
  train.seed = derive_seed(config.seed, 3);
  AugmentSpec augment = config.augment;
  augment.seed = derive_seed(config.seed, 4);

  TrainedModel out;
  out.data = prepare_data(source.train, source.test ? &*source.test : nullptr, train, augment);
  out.model = config.model;
  out.model.n_channels = out.data.n_channels;
  const PadParameters init = init_parameters(out.model, derive_seed(config.seed, 2));
  out.fit = fit(out.data.train, out.data.validation, init, out.model, train, on_epoch);
  return out;
}

}  // namespace

DataSource resolve_data(const RunConfig& config) {
  DataSource src;
  if (!config.train_path.empty()) {
    src.train = load_csv(config.train_path);
    if (!config.test_path.empty()) src.test = load_csv(config.test_path);
    return src;
  }
  if (!config.test_path.empty()) throw ConfigError("data.test requires data.train");
  auto [train, test] = split_sequence(generate_synthetic(seeded_synthetic(config)), config.train_fraction);
  src.train = std::move(train);
  src.test = std::move(test);
  return src;
}

json cmd_synth(const RunConfig& config, const std::filesystem::path& out) {
  ensure_dir(out);
  const SyntheticSequence synth = generate_synthetic_detailed(seeded_synthetic(config));
  const auto [train, test] = split_sequence(synth.sequence, config.train_fraction);
  save_csv(train, out / "train.csv");
  save_csv(test, out / "test.csv");

  json anomalies = json::array();
  for (const auto& a : synth.anomalies) {
    anomalies.push_back({{"start", a.start}, {"length", a.length}, {"kind", a.level_shift ? "level" : "burst"}});
  }
  const json report = {{"config", to_json(config)},
                       {"length", synth.sequence.length()},
                       {"flagged", synth.sequence.flagged_count()},
                       {"train_rows", train.length()},
                       {"test_rows", test.length()},
                       {"anomalies", std::move(anomalies)}};
  write_json(out / "synth.json", report);
  return report;
}

json cmd_augment(const std::filesystem::path& input, const RunConfig& config, const std::filesystem::path& out) {
  const RawSequence seq = load_csv(input);
  ensure_dir(out);
  AugmentSpec spec = config.augment;
  spec.seed = derive_seed(config.seed, 4);
  const AugmentResult result = augment_with_trace(seq, spec);
  save_csv(result.sequence, out / "augmented.csv");

  json implants = json::array();
  for (const auto& s : result.implants) {
    implants.push_back({{"start", s.start}, {"length", s.length}, {"source", s.source}});
  }
  const double t = static_cast<double>(seq.length());
  const json report = {
      {"config", to_json(config)},
      {"input", input.filename().string()},
      {"original_length", seq.length()},
      {"augmented_length", result.sequence.length()},
      {"anomaly_ratio", static_cast<double>(result.sequence.length() - seq.length()) / t},
      {"implants", std::move(implants)}};
  write_json(out / "augment.json", report);
  return report;
}

json cmd_train(const RunConfig& config, const std::filesystem::path& out, const LogSink& log) {
  const DataSource source = resolve_data(config);
  ensure_dir(out);
  std::ofstream jsonl(out / "train_log.jsonl", std::ios::binary);
  if (!jsonl) throw InputError("cannot write " + (out / "train_log.jsonl").string());

  const TrainedModel trained = train_model(config, DataSource{source.train, std::nullopt}, [&](const EpochLog& e) {
    json line = to_json(e);
    line["event"] = "epoch";
    jsonl << line.dump() << '\n';
    jsonl.flush();
    if (log) log(line);
  });

  Checkpoint cp{trained.model, trained.fit.best, trained.data.stats, to_json(config)};
  save_checkpoint(cp, out / "checkpoint.json");

  json history = json::array();
  for (const auto& e : trained.fit.history) history.push_back(epoch_record(e));
  const json report = {{"config", to_json(config)},
                       {"model", to_json(trained.model)},
                       {"parameter_count", trained.fit.best.total_count()},
                       {"train_windows", trained.data.train.size()},
                       {"validation_windows", trained.data.validation.size()},
                       {"best_epoch", trained.fit.best_epoch},
                       {"best_score", trained.fit.best_score},
                       {"parameter_hashes", parameter_hashes(trained.fit.best)},
                       {"history", std::move(history)}};
  write_json(out / "train.json", report);
  return report;
}

json cmd_eval(const RunConfig& config, const EvalOptions& options, const std::filesystem::path& out) {
  const Checkpoint cp = load_checkpoint(options.checkpoint);
  if (!cp.stats) throw InputError("checkpoint has no normalization statistics");

  RawSequence seq;
  if (options.data) {
    seq = load_csv(*options.data);
  } else {
    DataSource src = resolve_data(config);
    if (!src.test) throw InputError("no evaluation data: pass --data or set data.test");
    seq = std::move(*src.test);
  }
  if (!seq.labeled()) throw InputError("evaluation data has no label column");

  const double threshold = options.threshold.value_or(config.train.threshold);
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  const std::vector<double> drops = options.drop.value_or(config.drop_ratios);
  for (double r : drops) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("drop ratio must lie in [0, 1)");
  }

  const std::vector<BatchSample> samples =
      prepare_samples(seq, *cp.stats, config.train.window_size, config.train.poa_horizon);
  if (samples.empty()) throw InputError("evaluation data yields no complete window pairs");

  ensure_dir(out);
  json results = json::array();
  for (double r : drops) {
    const std::vector<BatchSample> dropped = drop_inputs(samples, r, derive_seed(config.seed, 5));
    const ValidationScores s = evaluate_samples(dropped, cp.params, cp.model, config.train.solver, threshold);
    results.push_back({{"drop", r}, {"anomaly", to_json(s.anomaly, false)}, {"poa", to_json(s.poa, false)}});
  }
  const json report = {{"config", to_json(config)},
                       {"checkpoint_hashes", parameter_hashes(cp.params)},
                       {"threshold", threshold},
                       {"windows", samples.size()},
                       {"results", std::move(results)}};
  write_json(out / "eval.json", report);
  return report;
}

json to_json(const GradCheckReport& report) {
  json groups = json::object();
  for (const auto& g : report.groups) {
    groups[std::string(group_name(g.group))] = {
        {"coordinates", g.coordinates}, {"max_rel_err", g.max_rel_err}, {"max_abs_err", g.max_abs_err}};
  }
  return {{"passed", report.passed}, {"max_rel_err", report.max_rel_err}, {"groups", std::move(groups)}};
}

json cmd_gradcheck(const RunConfig& config, const std::filesystem::path& out) {
  GradCheckConfig gc;
  gc.seed = config.seed;
  const GradCheckReport r = gradient_check(gc);
  ensure_dir(out);
  json report = to_json(r);
  report["config"] = to_json(config);
  report["tolerance"] = gc.tolerance;
  report["step"] = gc.step;
  write_json(out / "gradcheck.json", report);
  return report;
}

json cmd_sweep(const RunConfig& config, const std::filesystem::path& out, const LogSink& log) {
  if (config.sweep_horizons.empty()) throw ConfigError("sweep.horizons is empty");
  const DataSource source = resolve_data(config);
  if (!source.test) throw InputError("sweep needs test data: set data.test");
  ensure_dir(out);

  std::string csv = "p,poa_f1\n";
  json rows = json::array();
  for (std::size_t p : config.sweep_horizons) {
    RunConfig run = config;
    run.train.poa_horizon = p;
    const TrainedModel trained = train_model(run, source, {});
    const ValidationScores s =
        evaluate_samples(trained.data.test, trained.fit.best, trained.model, run.train.solver, run.train.threshold);
    const json row = {{"p", p}, {"poa_f1", s.poa.f1}, {"anomaly_f1", s.anomaly.f1}, {"best_epoch", trained.fit.best_epoch}};
    if (log) {
      json line = row;
      line["event"] = "sweep";
      log(line);
    }
    csv += std::to_string(p) + "," + json(s.poa.f1).dump() + "\n";
    rows.push_back(row);
  }
  write_text(out / "sweep.csv", csv);
  const json report = {{"config", to_json(config)}, {"rows", std::move(rows)}};
  write_json(out / "sweep.json", report);
  return report;
}

}  // namespace pad
