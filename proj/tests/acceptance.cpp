// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pad/commands.hpp"
#include "pad/gradcheck.hpp"
#include "pad/pipeline.hpp"

using namespace pad;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void gradient_fidelity() {
  GradCheckConfig cfg;
  const GradCheckReport r = gradient_check(cfg);
  std::string detail = fmt("max_rel_err=%.3g (<= 1e-4) in %.2f s (<= 10 s);", r.max_rel_err, r.seconds);
  for (const auto& g : r.groups) {
    detail += fmt(" %s:%zu", std::string(group_name(g.group)).c_str(), g.coordinates);
  }
  bool all_groups = r.groups.size() == kGroupCount;
  for (const auto& g : r.groups) all_groups = all_groups && g.coordinates > 0;
  report(1, "gradient fidelity", r.max_rel_err <= 1e-4 && r.seconds <= 10.0 && all_groups, detail);
}

void spline_correctness() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gap(0.1, 2.0), val(-5.0, 5.0);
  double interp = 0.0, boundary = 0.0, deriv = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    TimeSeriesWindow w;
    const std::size_t n = 30, ch = 4;
    w.values = Tensor(n, ch);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w.times.push_back(t);
      t += gap(rng);
      for (std::size_t c = 0; c < ch; ++c) w.values(i, c) = val(rng);
    }
    const CubicSplinePath path = fit_natural_cubic_spline(w);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = path.eval(w.times[i]);
      for (std::size_t c = 0; c < ch; ++c) interp = std::max(interp, std::abs(v[c] - w.values(i, c)));
    }
    for (double e : {path.t_first(), path.t_last()})
      for (double d : path.eval_second_derivative(e)) boundary = std::max(boundary, std::abs(d));
    const double h = 1e-6;
    std::uniform_real_distribution<double> pick(path.t_first() + h, path.t_last() - h);
    for (int k = 0; k < 100; ++k) {
      const double x = pick(rng);
      const auto d = path.eval_derivative(x);
      const auto p = path.eval(x + h), m = path.eval(x - h);
      for (std::size_t c = 0; c < ch; ++c) deriv = std::max(deriv, std::abs(d[c] - (p[c] - m[c]) / (2 * h)));
    }
  }
  report(2, "spline correctness", interp <= 1e-10 && boundary <= 1e-7 && deriv <= 1e-5,
         fmt("knot error %.2g (<= 1e-10), endpoint |X''| %.2g (<= 1e-7), derivative vs FD %.2g (<= 1e-5)", interp,
             boundary, deriv));
}

double linear_system_error(Scheme scheme, std::size_t steps) {
  // dz/dt = A z, A = [[-0.5, 1], [-1, -0.5]]: z(t) = e^{-t/2} R(t) z0.
  Tape tape;
  const Var at = tape.constant(Tensor::from_rows({{-0.5, -1.0}, {1.0, -0.5}}));
  const State init = {tape.constant(Tensor::from_rows({{1.0, 0.5}}))};
  const VectorField field = [&](const State& s, std::span<const double>) { return State{ad::matmul(s[0], at)}; };
  const double T = 2.0;
  const Tensor z = integrate(field, init, uniform_grid(0.0, T, steps), scheme)[0].value();
  const double e = std::exp(-0.5 * T), c = std::cos(T), s = std::sin(T);
  return std::hypot(z[0] - e * (c * 1.0 + s * 0.5), z[1] - e * (-s * 1.0 + c * 0.5));
}

void solver_order() {
  const double rk4 = std::log2(linear_system_error(Scheme::Rk4, 32) / linear_system_error(Scheme::Rk4, 64));
  const double euler = std::log2(linear_system_error(Scheme::Euler, 256) / linear_system_error(Scheme::Euler, 512));
  report(3, "solver order", rk4 >= 3.5 && euler >= 0.9,
         fmt("RK4 order %.3f (>= 3.5), Euler order %.3f (>= 0.9)", rk4, euler));
}

void structural_coupling() {
  GradCheckConfig base;
  const ModelConfig model = base.model;
  bool ok = true;
  double c_anomaly_min = 1e300, c_poa_min = 1e300;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PadParameters params = init_parameters(model, 100 + seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-1.0, 1.0), gap(0.5, 1.5);
    std::vector<TimeSeriesWindow> windows(3);
    for (auto& w : windows) {
      w.values = Tensor(8, model.n_channels);
      double t = 0.0;
      for (std::size_t i = 0; i < 8; ++i) {
        w.times.push_back(t);
        t += gap(rng);
        for (std::size_t c = 0; c < model.n_channels; ++c) w.values(i, c) = val(rng);
      }
    }
    std::vector<const TimeSeriesWindow*> ptrs = {&windows[0], &windows[1], &windows[2]};
    for (bool anomaly : {true, false}) {
      Tape tape;
      const BoundParameters bound = bind(tape, params);
      const BatchOutput out = forward_batch(tape, bound, ptrs, model, SolverConfig{});
      tape.backward(ad::sum(anomaly ? out.p_anomaly : out.p_poa));
      auto mass = [&](Group g) {
        double s = 0.0;
        for (const Var& v : bound[g]) {
          const Tensor grad = tape.grad(v);
          for (double x : grad.data()) s += std::abs(x);
        }
        return s;
      };
      if (anomaly) {
        ok = ok && mass(Group::G) == 0.0 && mass(Group::Z) == 0.0 && mass(Group::P) == 0.0;
        c_anomaly_min = std::min(c_anomaly_min, mass(Group::C));
      } else {
        ok = ok && mass(Group::F) == 0.0 && mass(Group::H) == 0.0 && mass(Group::A) == 0.0;
        c_poa_min = std::min(c_poa_min, mass(Group::C));
      }
    }
  }
  ok = ok && c_anomaly_min > 0.0 && c_poa_min > 0.0;
  report(4, "structural coupling", ok,
         fmt("dP_poa/dF == 0 and dP_anomaly/dG == 0 exactly; min |dP_anomaly/dC|_1 %.3g, min |dP_poa/dC|_1 %.3g (> 0)",
             c_anomaly_min, c_poa_min));
}

void routing() {
  BenchmarkConfig bench = default_benchmark_config();
  bench.synthetic.length = 6000;
  bench.synthetic.anomaly_count = 6;
  SyntheticConfig synth = bench.synthetic;
  synth.seed = 5;
  const auto [train_raw, test_raw] = split_sequence(generate_synthetic(synth), 0.7);
  TrainConfig cfg = bench.train;
  const PreparedData data = prepare_data(train_raw, nullptr, cfg, bench.augment);
  ModelConfig model = bench.model;
  model.n_channels = data.n_channels;
  PadParameters params = init_parameters(model, 6);
  AdamW opt({cfg.learning_rate, cfg.weight_decay});

  std::size_t iterations = 0, violations = 0;
  for (std::size_t b = 0; b < data.train.size(); b += cfg.batch_size) {
    std::vector<const BatchSample*> batch;
    for (std::size_t i = b; i < std::min(b + cfg.batch_size, data.train.size()); ++i) batch.push_back(&data.train[i]);
    PadParameters before = params;
    train_iteration(batch, params, opt, model, cfg, [&](SubStep step, const PadParameters& now) {
      if (step == SubStep::Anomaly && now.hash(Group::G) != before.hash(Group::G)) ++violations;
      if (step == SubStep::Distill && now.hash(Group::F) != before.hash(Group::F)) ++violations;
      before = now;
    });
    ++iterations;
  }
  report(5, "sub-step routing", violations == 0 && iterations > 0,
         fmt("%zu iterations, %zu hash changes of G in sub-step 1 or F in sub-step 2", iterations, violations));
}

void augmentation() {
  const std::size_t T = 10000;
  const double gamma = 0.1;
  SyntheticConfig sc;
  sc.length = T;
  sc.anomaly_count = 0;
  sc.seed = 77;
  RawSequence base = generate_synthetic(sc);
  base.anomaly_flags.clear();

  bool ok = true;
  double lo = 1.0, hi = 0.0;
  std::size_t min_seg = T, max_seg = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RawSequence out = augment(base, AugmentSpec{gamma, 100, 500, seed});
    const double ratio = static_cast<double>(out.length() - T) / static_cast<double>(T);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ok = ok && ratio > gamma && ratio <= gamma + 500.0 / T;
    // Flag runs are the implants; everything else is the original, in order.
    std::size_t k = 0;
    for (std::size_t i = 0; i < out.length();) {
      if (out.anomaly_flags[i]) {
        std::size_t j = i;
        while (j < out.length() && out.anomaly_flags[j]) ++j;
        min_seg = std::min(min_seg, j - i);
        max_seg = std::max(max_seg, j - i);
        i = j;
        continue;
      }
      for (std::size_t c = 0; c < base.n_channels(); ++c) ok = ok && k < T && out.values(i, c) == base.values(k, c);
      ++k;
      ++i;
    }
    ok = ok && k == T;
  }
  ok = ok && min_seg >= 100 && max_seg <= 500;
  report(6, "augmentation", ok,
         fmt("ratio in [%.4f, %.4f] within (0.1, 0.15]; segment lengths in [%zu, %zu] within [100, 500]; originals "
             "preserved in order (20 seeds)",
             lo, hi, min_seg, max_seg));
}

struct SeedRun {
  double anomaly0 = 0, poa0 = 0, anomaly50 = 0, seconds = 0;
  double best_val_anomaly = 0;
};

SeedRun run_seed(const BenchmarkConfig& cfg, std::uint64_t seed) {
  const BenchmarkResult r = run_synthetic_benchmark(cfg, seed);
  SeedRun s;
  for (const auto& d : r.drops) {
    if (d.ratio == 0.0) {
      s.anomaly0 = d.test.anomaly.f1;
      s.poa0 = d.test.poa.f1;
    }
    if (d.ratio == 0.5) s.anomaly50 = d.test.anomaly.f1;
  }
  for (const auto& e : r.fit.history) s.best_val_anomaly = std::max(s.best_val_anomaly, e.val_f1_anomaly);
  s.seconds = r.wall_seconds;
  return s;
}

void benchmark_criteria() {
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  BenchmarkConfig cfg = default_benchmark_config();
  cfg.drop_ratios = {0.0, 0.5};

  std::vector<double> a0, p0, a50;
  double total = 0.0, worst_val = 1.0;
  std::string per_seed;
  for (std::uint64_t seed : seeds) {
    const SeedRun s = run_seed(cfg, seed);
    a0.push_back(s.anomaly0);
    p0.push_back(s.poa0);
    a50.push_back(s.anomaly50);
    total += s.seconds;
    worst_val = std::min(worst_val, s.best_val_anomaly);
    per_seed += fmt(" [seed %llu: a=%.3f p=%.3f a@50%%=%.3f %.0fs]", static_cast<unsigned long long>(seed), s.anomaly0,
                    s.poa0, s.anomaly50, s.seconds);
  }
  const double ma = median(a0), mp = median(p0), m50 = median(a50);
  report(7, "synthetic end-to-end", ma >= 0.85 && mp >= 0.70 && total <= 300.0,
         fmt("median anomaly F1 %.3f (>= 0.85), median PoA F1 %.3f (>= 0.70), total %.0f s (<= 300 s); lowest best "
             "validation anomaly F1 %.3f;",
             ma, mp, total, worst_val) +
             per_seed);
  report(8, "irregular robustness", m50 >= 0.9 * ma,
         fmt("median anomaly F1 at 50%% drop %.3f >= 0.9 x %.3f = %.3f", m50, ma, 0.9 * ma));

  BenchmarkConfig ablation = cfg;
  ablation.drop_ratios = {0.0};
  ablation.model = rebalance_without_shared(cfg.model);
  std::vector<double> q0;
  for (std::uint64_t seed : seeds) q0.push_back(run_seed(ablation, seed).poa0);
  ModelConfig full = cfg.model, reduced = ablation.model;
  full.n_channels = reduced.n_channels = cfg.synthetic.n_channels;
  const double mq = median(q0);
  report(9, "multi-task ablation", mp >= mq,
         fmt("median PoA F1 shared %.3f vs without shared branch %.3f (gap %+.3f); parameters %zu vs %zu", mp, mq,
             mp - mq, init_parameters(full, 0).total_count(), init_parameters(reduced, 0).total_count()));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  RunConfig cfg;
  const BenchmarkConfig bench = default_benchmark_config();
  cfg.model = bench.model;
  cfg.train = bench.train;
  cfg.train.epochs = 3;
  cfg.synthetic = bench.synthetic;
  cfg.synthetic.length = 8000;
  cfg.synthetic.anomaly_count = 8;
  cfg.seed = 11;
  const std::filesystem::path out = std::filesystem::temp_directory_path() / "pad_acceptance_determinism";
  std::filesystem::remove_all(out);
  cfg.output_dir = out.string();

  EvalOptions opt;
  opt.checkpoint = out / "checkpoint.json";
  cmd_train(cfg, out);
  cmd_eval(cfg, opt, out);
  const std::string first_eval = read_file(out / "eval.json");
  const std::string first_cp = read_file(out / "checkpoint.json");
  cmd_train(cfg, out);
  cmd_eval(cfg, opt, out);
  const bool same_eval = read_file(out / "eval.json") == first_eval;
  const bool same_cp = read_file(out / "checkpoint.json") == first_cp;
  std::filesystem::remove_all(out);
  report(10, "determinism", same_eval && same_cp && !first_eval.empty(),
         fmt("eval.json identical: %s (%zu bytes), checkpoint identical: %s", same_eval ? "yes" : "no",
             first_eval.size(), same_cp ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  gradient_fidelity();
  spline_correctness();
  solver_order();
  structural_coupling();
  routing();
  augmentation();
  benchmark_criteria();
  determinism();
  std::printf("%d failure(s), %.0f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
