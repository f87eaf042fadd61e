#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pad/commands.hpp"
#include "pad/errors.hpp"

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kDivergence = 4, kAcceptance = 5 };

using nlohmann::json;

void emit(const json& j) { std::cout << j.dump() << std::endl; }

int fail(int code, const char* kind, const std::string& message) {
  emit({{"event", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}});
  return code;
}

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration");
  cmd->add_option("--seed", c.seed, "Master seed (overrides config)");
  cmd->add_option("--out", c.out, "Output directory (overrides config)");
  cmd->add_option("--threads", c.threads, "Worker threads for gradient shards")->check(CLI::PositiveNumber);
}

pad::RunConfig load(const Common& c) {
  pad::RunConfig cfg = c.config_path.empty() ? pad::RunConfig{} : pad::load_run_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output_dir = *c.out;
  if (c.threads) cfg.train.threads = *c.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anomaly and precursor-of-anomaly detection with co-evolving neural CDEs"};
  app.require_subcommand(1);

  Common synth_opts, augment_opts, train_opts, eval_opts, grad_opts, sweep_opts;
  std::string augment_input;
  std::optional<double> augment_gamma;
  pad::EvalOptions eval;
  std::string eval_checkpoint;
  std::optional<std::string> eval_data;
  std::vector<double> eval_drop;
  std::optional<double> eval_threshold;

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic train/test CSV files");
  add_common(synth, synth_opts);

  CLI::App* augment = app.add_subcommand("augment", "Implant copied segments as labeled anomalies");
  add_common(augment, augment_opts);
  augment->add_option("--in", augment_input, "Unlabeled input CSV")->required();
  augment->add_option("--gamma", augment_gamma, "Implant ratio (overrides config)");

  CLI::App* train = app.add_subcommand("train", "Train and write a checkpoint");
  add_common(train, train_opts);

  CLI::App* evalc = app.add_subcommand("eval", "Evaluate a checkpoint on labeled data");
  add_common(evalc, eval_opts);
  evalc->add_option("--checkpoint", eval_checkpoint, "Checkpoint JSON")->required();
  evalc->add_option("--data", eval_data, "Labeled CSV (default: config test data)");
  evalc->add_option("--drop", eval_drop, "Observation drop ratios")->delimiter(',');
  evalc->add_option("--threshold", eval_threshold, "Decision threshold");

  CLI::App* grad = app.add_subcommand("gradcheck", "Compare tape gradients with finite differences");
  add_common(grad, grad_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "PoA F1 as a function of the output length");
  add_common(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, "usage", e.what());
  }

  const pad::LogSink log = emit;
  try {
    if (synth->parsed()) {
      const pad::RunConfig cfg = load(synth_opts);
      const json r = pad::cmd_synth(cfg, cfg.output_dir);
      emit({{"event", "done"}, {"command", "synth"}, {"flagged", r["flagged"]}, {"out", cfg.output_dir}});
    } else if (augment->parsed()) {
      pad::RunConfig cfg = load(augment_opts);
      if (augment_gamma) cfg.augment.gamma = *augment_gamma;
      cfg.augment.validate();
      const json r = pad::cmd_augment(augment_input, cfg, cfg.output_dir);
      emit({{"event", "done"}, {"command", "augment"}, {"anomaly_ratio", r["anomaly_ratio"]}, {"out", cfg.output_dir}});
    } else if (train->parsed()) {
      const pad::RunConfig cfg = load(train_opts);
      const json r = pad::cmd_train(cfg, cfg.output_dir, log);
      emit({{"event", "done"}, {"command", "train"}, {"best_epoch", r["best_epoch"]}, {"out", cfg.output_dir}});
    } else if (evalc->parsed()) {
      const pad::RunConfig cfg = load(eval_opts);
      eval.checkpoint = eval_checkpoint;
      if (eval_data) eval.data = *eval_data;
      if (!eval_drop.empty()) eval.drop = eval_drop;
      eval.threshold = eval_threshold;
      const json r = pad::cmd_eval(cfg, eval, cfg.output_dir);
      for (const json& row : r["results"]) {
        emit({{"event", "eval"}, {"drop", row["drop"]}, {"anomaly_f1", row["anomaly"]["f1"]}, {"poa_f1", row["poa"]["f1"]}});
      }
    } else if (grad->parsed()) {
      const pad::RunConfig cfg = load(grad_opts);
      const json r = pad::cmd_gradcheck(cfg, cfg.output_dir);
      const bool passed = r["passed"].get<bool>();
      std::cout << (passed ? "PASS" : "FAIL") << " max_rel_err=" << r["max_rel_err"].get<double>() << std::endl;
      if (!passed) return kAcceptance;
    } else if (sweep->parsed()) {
      const pad::RunConfig cfg = load(sweep_opts);
      pad::cmd_sweep(cfg, cfg.output_dir, log);
      emit({{"event", "done"}, {"command", "sweep"}, {"out", cfg.output_dir}});
    }
  } catch (const pad::ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const pad::DivergenceError& e) {
    return fail(kDivergence, "divergence", e.what());
  } catch (const pad::Error& e) {
    return fail(kData, "data", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kOk;
}
