#include "pad/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "pad/errors.hpp"

namespace pad {

void ModelConfig::validate() const {
  if (n_channels == 0 || hidden_dim == 0 || width_f == 0 || width_g == 0 ||
      n_hidden_layers_f == 0 || n_hidden_layers_g == 0) {
    throw ConfigError("model dimensions and layer counts must be positive");
  }
  if (shared_branch && (width_c == 0 || n_hidden_layers_c == 0)) {
    throw ConfigError("shared branch needs positive width_c and n_hidden_layers_c");
  }
}

std::string_view group_name(Group group) {
  static constexpr std::string_view names[] = {"f", "g", "c", "h", "z", "a", "p"};
  return names[static_cast<std::size_t>(group)];
}

Group parse_group(std::string_view name) {
  for (Group g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  throw InputError("unknown parameter group '" + std::string(name) + "'");
}

std::size_t PadParameters::count(Group g) const {
  std::size_t n = 0;
  for (const Tensor& t : (*this)[g]) n += t.size();
  return n;
}

std::size_t PadParameters::total_count() const {
  std::size_t n = 0;
  for (Group g : kAllGroups) n += count(g);
  return n;
}

std::uint64_t PadParameters::hash(Group g) const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const Tensor& t : (*this)[g]) {
    for (std::size_t d : t.shape()) mix(&d, sizeof d);
    mix(t.data().data(), t.size() * sizeof(double));
  }
  return h;
}

namespace {

void push_layer(std::vector<Tensor>& group, std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor w(in, out), b(1, out);
  for (double& v : w.storage()) v = dist(rng);
  for (double& v : b.storage()) v = dist(rng);
  group.push_back(std::move(w));
  group.push_back(std::move(b));
}

void push_mlp(std::vector<Tensor>& group, std::size_t in, std::size_t width, std::size_t hidden_layers,
              std::size_t out, std::mt19937_64& rng) {
  push_layer(group, in, width, rng);
  for (std::size_t i = 1; i < hidden_layers; ++i) push_layer(group, width, width, rng);
  push_layer(group, width, out, rng);
}

std::size_t mlp_count(std::size_t in, std::size_t width, std::size_t hidden_layers, std::size_t out) {
  return (in + 1) * width + (hidden_layers - 1) * (width + 1) * width + (width + 1) * out;
}

}  // namespace

PadParameters init_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  PadParameters p;
  const std::size_t hid = config.hidden_dim;
  const std::size_t out = config.field_outputs();
  push_mlp(p[Group::F], hid, config.width_f, config.n_hidden_layers_f, out, rng);
  push_mlp(p[Group::G], hid, config.width_g, config.n_hidden_layers_g, out, rng);
  if (config.shared_branch) {
    push_mlp(p[Group::C], hid, config.width_c, config.n_hidden_layers_c, out, rng);
  }
  push_layer(p[Group::H], config.path_channels(), hid, rng);
  push_layer(p[Group::Z], config.path_channels(), hid, rng);
  push_layer(p[Group::A], hid, 1, rng);
  push_layer(p[Group::P], hid, 1, rng);
  return p;
}

ModelConfig rebalance_without_shared(const ModelConfig& config) {
  config.validate();
  const std::size_t hid = config.hidden_dim, out = config.field_outputs();
  const std::size_t target =
      mlp_count(hid, config.width_f, config.n_hidden_layers_f, out) +
      mlp_count(hid, config.width_g, config.n_hidden_layers_g, out) +
      (config.shared_branch ? mlp_count(hid, config.width_c, config.n_hidden_layers_c, out) : 0);

  ModelConfig best = config;
  best.shared_branch = false;
  best.width_c = 0;
  std::size_t best_gap = static_cast<std::size_t>(-1);
  const double ratio = static_cast<double>(config.width_g) / static_cast<double>(config.width_f);
  for (std::size_t wf = 1; wf <= 8 * config.width_f + 8; ++wf) {
    const auto wg = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ratio * wf)));
    const std::size_t n = mlp_count(hid, wf, config.n_hidden_layers_f, out) +
                          mlp_count(hid, wg, config.n_hidden_layers_g, out);
    const std::size_t gap = n > target ? n - target : target - n;
    if (gap < best_gap) {
      best_gap = gap;
      best.width_f = wf;
      best.width_g = wg;
    }
  }
  return best;
}

BoundParameters bind(Tape& tape, const PadParameters& params, GroupSet trainable) {
  BoundParameters bound;
  for (Group g : kAllGroups) {
    auto& vars = bound.vars[static_cast<std::size_t>(g)];
    for (const Tensor& t : params[g]) {
      vars.push_back(trainable.contains(g) ? tape.variable(t) : tape.constant(t));
    }
  }
  return bound;
}

Var mlp_tanh(Var x, std::span<const Var> layers) {
  const std::size_t n_layers = layers.size() / 2;
  for (std::size_t i = 0; i < n_layers; ++i) {
    x = ad::affine(x, layers[2 * i], layers[2 * i + 1]);
    x = (i + 1 < n_layers) ? ad::relu(x) : ad::tanh(x);
  }
  return x;
}

namespace {

Var field_with_shared(Var state, Group own, const BoundParameters& params, const ModelConfig& config) {
  Var out = mlp_tanh(state, params[own]);
  if (config.shared_branch) out = ad::add(out, mlp_tanh(state, params[Group::C]));
  return out;
}

}  // namespace

Var vector_field_f(Var h, const BoundParameters& params, const ModelConfig& config) {
  return field_with_shared(h, Group::F, params, config);
}

Var vector_field_g(Var z, const BoundParameters& params, const ModelConfig& config) {
  return field_with_shared(z, Group::G, params, config);
}

InitialStates init_states(Var x0, const BoundParameters& params) {
  const auto& h = params[Group::H];
  const auto& z = params[Group::Z];
  return {ad::affine(x0, h[0], h[1]), ad::affine(x0, z[0], z[1])};
}

CubicSplinePath build_path(const TimeSeriesWindow& window, const ModelConfig& config) {
  validate_window(window);
  if (window.n_channels() != config.n_channels) {
    throw DimensionError("window has " + std::to_string(window.n_channels()) +
                         " channels, model expects " + std::to_string(config.n_channels));
  }
  if (!config.append_time) return fit_natural_cubic_spline(window.times, window.values);
  const std::size_t n = window.n_obs(), ch = window.n_channels();
  Tensor augmented(n, ch + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < ch; ++c) augmented(r, c) = window.values(r, c);
    augmented(r, ch) = window.times[r];
  }
  return fit_natural_cubic_spline(window.times, augmented);
}

BatchOutput forward_batch(Tape& tape, const BoundParameters& params,
                          std::span<const TimeSeriesWindow* const> windows,
                          const ModelConfig& model, const SolverConfig& solver, Branches branches) {
  if (windows.empty()) throw InputError("forward on an empty batch");
  if (!branches.anomaly && !branches.poa) throw ContractError("forward with no branch enabled");
  const std::size_t batch = windows.size();
  const std::size_t channels = model.path_channels();

  std::vector<CubicSplinePath> paths;
  std::vector<std::vector<double>> knots;
  paths.reserve(batch);
  knots.reserve(batch);
  Tensor x0(batch, channels);
  for (std::size_t r = 0; r < batch; ++r) {
    paths.push_back(build_path(*windows[r], model));
    knots.emplace_back(paths.back().knots().begin(), paths.back().knots().end());
    paths.back().eval(paths.back().t_first(), std::span<double>(&x0(r, 0), channels));
  }
  const TimeGrid grid = make_time_grid(knots, solver);

  const InitialStates init = init_states(tape.constant(std::move(x0)), params);
  State initial;
  if (branches.anomaly) initial.push_back(init.h0);
  if (branches.poa) initial.push_back(init.z0);

  const VectorField field = [&](const State& state, std::span<const double> t) {
    Tensor dx(batch, channels);
    for (std::size_t r = 0; r < batch; ++r) {
      paths[r].eval_derivative(t[r], std::span<double>(&dx(r, 0), channels));
    }
    const Var control = tape.constant(std::move(dx));
    State slope;
    std::size_t i = 0;
    if (branches.anomaly) {
      slope.push_back(ad::contract_rows(vector_field_f(state[i++], params, model), control));
    }
    if (branches.poa) {
      slope.push_back(ad::contract_rows(vector_field_g(state[i++], params, model), control));
    }
    return slope;
  };

  State final_state;
  try {
    final_state = integrate(field, initial, grid, solver.scheme);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + " (batch starting at window " +
                          std::to_string(windows.front()->window_index) + ")");
  }

  BatchOutput out;
  std::size_t i = 0;
  if (branches.anomaly) {
    out.h_final = final_state[i++];
    const auto& a = params[Group::A];
    out.p_anomaly = ad::sigmoid(ad::affine(out.h_final, a[0], a[1]));
  }
  if (branches.poa) {
    out.z_final = final_state[i++];
    const auto& p = params[Group::P];
    out.p_poa = ad::sigmoid(ad::affine(out.z_final, p[0], p[1]));
  }
  return out;
}

ForwardResult forward(const TimeSeriesWindow& window, const PadParameters& params,
                      const ModelConfig& model, const SolverConfig& solver) {
  Tape tape;
  const BoundParameters bound = bind(tape, params, GroupSet{});
  const TimeSeriesWindow* batch[] = {&window};
  const BatchOutput out = forward_batch(tape, bound, batch, model, solver);
  ForwardResult r;
  r.p_anomaly = out.p_anomaly.value()[0];
  r.p_poa = out.p_poa.value()[0];
  const auto h = out.h_final.value().data();
  const auto z = out.z_final.value().data();
  r.h_final.assign(h.begin(), h.end());
  r.z_final.assign(z.begin(), z.end());
  return r;
}

Prediction predict(std::span<const TimeSeriesWindow> windows, const PadParameters& params,
                   const ModelConfig& model, const SolverConfig& solver, std::size_t chunk,
                   Branches branches) {
  Prediction out;
  out.p_anomaly.assign(windows.size(), 0.0);
  out.p_poa.assign(windows.size(), 0.0);
  if (windows.empty()) return out;
  chunk = std::max<std::size_t>(chunk, 1);

  // Knot-aligned grids need equal observation counts inside one batch.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < windows.size(); ++i) by_length[windows[i].n_obs()].push_back(i);

  for (const auto& [len, idx] : by_length) {
    for (std::size_t start = 0; start < idx.size(); start += chunk) {
      const std::size_t stop = std::min(idx.size(), start + chunk);
      std::vector<const TimeSeriesWindow*> batch;
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&windows[idx[k]]);
      Tape tape;
      const BoundParameters bound = bind(tape, params, GroupSet{});
      const BatchOutput res = forward_batch(tape, bound, batch, model, solver, branches);
      for (std::size_t k = start; k < stop; ++k) {
        if (branches.anomaly) out.p_anomaly[idx[k]] = res.p_anomaly.value()[k - start];
        if (branches.poa) out.p_poa[idx[k]] = res.p_poa.value()[k - start];
      }
    }
  }
  return out;
}

}  // namespace pad
