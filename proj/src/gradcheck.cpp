#include "pad/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace pad {

ModelConfig GradCheckConfig::tiny_model() {
  ModelConfig m;
  m.n_channels = 3;
  m.hidden_dim = 4;
  m.width_f = m.width_g = m.width_c = 8;
  m.n_hidden_layers_f = m.n_hidden_layers_g = 2;
  m.n_hidden_layers_c = 1;
  return m;
}

namespace {

struct Problem {
  std::vector<TimeSeriesWindow> windows;
  Tensor labels;
  Tensor soft_targets;
};

// Irregularly spaced random windows with fixed labels and soft targets.
Problem make_problem(const GradCheckConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> gap(0.5, 1.5);
  std::uniform_real_distribution<double> prob(0.1, 0.9);
  Problem p{{}, Tensor(cfg.batch, 1), Tensor(cfg.batch, 1)};
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    TimeSeriesWindow w;
    w.window_index = b;
    w.values = Tensor(cfg.window_size, cfg.model.n_channels);
    double t = 0.0;
    for (std::size_t i = 0; i < cfg.window_size; ++i) {
      w.times.push_back(t);
      t += gap(rng);
      for (std::size_t c = 0; c < cfg.model.n_channels; ++c) w.values(i, c) = value(rng);
    }
    p.windows.push_back(std::move(w));
    p.labels(b, 0) = static_cast<double>(b % 2);
    p.soft_targets(b, 0) = prob(rng);
  }
  return p;
}

Var build_loss(Tape& tape, const BoundParameters& bound, const Problem& problem,
               const GradCheckConfig& cfg) {
  std::vector<const TimeSeriesWindow*> ptrs;
  for (const auto& w : problem.windows) ptrs.push_back(&w);
  const BatchOutput out = forward_batch(tape, bound, ptrs, cfg.model, cfg.solver);
  return ad::add(ad::bce_mean(out.p_anomaly, problem.labels), ad::bce_mean(out.p_poa, problem.soft_targets));
}

double loss_value(const PadParameters& params, const Problem& problem, const GradCheckConfig& cfg) {
  Tape tape;
  const BoundParameters bound = bind(tape, params, GroupSet{});
  return build_loss(tape, bound, problem, cfg).value().item();
}

}  // namespace

GradCheckReport gradient_check(const GradCheckConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const Problem problem = make_problem(config);
  PadParameters params = init_parameters(config.model, config.seed + 1);

  Tape tape;
  const BoundParameters bound = bind(tape, params);
  tape.backward(build_loss(tape, bound, problem, config));

  GradCheckReport report;
  for (Group g : kAllGroups) {
    GroupCheck check{g, 0, 0.0, 0.0};
    auto& tensors = params[g];
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const Tensor analytic = tape.grad(bound[g][k]);
      for (std::size_t i = 0; i < tensors[k].size(); ++i) {
        const double saved = tensors[k][i];
        tensors[k][i] = saved + config.step;
        const double plus = loss_value(params, problem, config);
        tensors[k][i] = saved - config.step;
        const double minus = loss_value(params, problem, config);
        tensors[k][i] = saved;
        const double numeric = (plus - minus) / (2.0 * config.step);
        const double abs_err = std::abs(analytic[i] - numeric);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), config.floor});
        check.max_abs_err = std::max(check.max_abs_err, abs_err);
        check.max_rel_err = std::max(check.max_rel_err, abs_err / denom);
        ++check.coordinates;
      }
    }
    report.max_rel_err = std::max(report.max_rel_err, check.max_rel_err);
    report.groups.push_back(check);
  }
  report.passed = report.max_rel_err <= config.tolerance;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace pad
