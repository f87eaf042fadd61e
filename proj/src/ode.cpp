#include "pad/ode.hpp"

#include "pad/errors.hpp"

namespace pad {

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "rk4") return Scheme::Rk4;
  throw ConfigError("unknown solver scheme '" + name + "' (expected euler or rk4)");
}

std::string to_string(Scheme scheme) { return scheme == Scheme::Euler ? "euler" : "rk4"; }

void SolverConfig::validate() const {
  if (steps_per_window < 1) throw ConfigError("solver steps_per_window must be >= 1");
}

TimeGrid::TimeGrid(std::size_t rows, std::size_t steps)
    : rows_(rows), steps_(steps), times_(rows * (steps + 1), 0.0) {}

TimeGrid uniform_grid(double t0, double t1, std::size_t steps) {
  if (!(t1 > t0)) throw InputError("integration interval must satisfy t1 > t0");
  if (steps < 1) throw ConfigError("at least one integration step is required");
  TimeGrid grid(1, steps);
  const double span = t1 - t0;
  for (std::size_t s = 0; s < steps; ++s) {
    grid.at(0, s) = t0 + span * static_cast<double>(s) / static_cast<double>(steps);
  }
  grid.at(0, steps) = t1;
  return grid;
}

TimeGrid make_time_grid(std::span<const std::vector<double>> knots, const SolverConfig& config) {
  config.validate();
  if (knots.empty()) throw InputError("empty batch");
  const std::size_t sub = config.steps_per_window;
  if (!config.knot_aligned) {
    TimeGrid grid(knots.size(), sub);
    for (std::size_t r = 0; r < knots.size(); ++r) {
      const TimeGrid row = uniform_grid(knots[r].front(), knots[r].back(), sub);
      for (std::size_t s = 0; s <= sub; ++s) grid.at(r, s) = row.at(0, s);
    }
    return grid;
  }
  const std::size_t n_knots = knots.front().size();
  if (n_knots < 2) throw InputError("a window needs at least 2 knots");
  TimeGrid grid(knots.size(), (n_knots - 1) * sub);
  for (std::size_t r = 0; r < knots.size(); ++r) {
    const auto& k = knots[r];
    if (k.size() != n_knots) {
      throw InputError("knot-aligned batch needs equal observation counts per window");
    }
    for (std::size_t i = 0; i + 1 < n_knots; ++i) {
      const double width = k[i + 1] - k[i];
      for (std::size_t s = 0; s < sub; ++s) {
        grid.at(r, i * sub + s) = k[i] + width * static_cast<double>(s) / static_cast<double>(sub);
      }
    }
    grid.at(r, grid.steps()) = k.back();
  }
  return grid;
}

namespace {

void check_finite(const State& state, std::size_t step) {
  for (const Var& v : state) {
    if (!v.value().all_finite()) {
      throw DivergenceError("non-finite solver state at step " + std::to_string(step));
    }
  }
}

State euler_step(const VectorField& field, const State& y, std::span<const double> t,
                 std::span<const double> dt) {
  const State k = field(y, t);
  State out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out.push_back(ad::add_scaled_rows(y[i], k[i], dt));
  return out;
}

State rk4_step(const VectorField& field, const State& y, std::span<const double> t,
               std::span<const double> t_next, std::span<const double> dt) {
  const std::size_t rows = t.size();
  std::vector<double> half(rows), t_mid(rows), t_end(rows), sixth(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    half[r] = 0.5 * dt[r];
    t_mid[r] = t[r] + half[r];
    t_end[r] = t_next[r];
    sixth[r] = dt[r] / 6.0;
  }
  auto shifted = [&](const State& base, const State& slope, std::span<const double> h) {
    State s;
    s.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) s.push_back(ad::add_scaled_rows(base[i], slope[i], h));
    return s;
  };
  const State k1 = field(y, t);
  const State k2 = field(shifted(y, k1, half), t_mid);
  const State k3 = field(shifted(y, k2, half), t_mid);
  const State k4 = field(shifted(y, k3, dt), t_end);

  static constexpr double weights[] = {1.0, 2.0, 2.0, 1.0};
  State out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Var terms[] = {k1[i], k2[i], k3[i], k4[i]};
    out.push_back(ad::add_scaled_rows(y[i], ad::combine(terms, weights), sixth));
  }
  return out;
}

}  // namespace

State integrate(const VectorField& field, const State& initial, const TimeGrid& grid,
                Scheme scheme) {
  State y = initial;
  const std::size_t rows = grid.rows();
  std::vector<double> t(rows), t_next(rows), dt(rows);
  for (std::size_t step = 0; step < grid.steps(); ++step) {
    for (std::size_t r = 0; r < rows; ++r) {
      t[r] = grid.at(r, step);
      t_next[r] = grid.at(r, step + 1);
      dt[r] = t_next[r] - t[r];
    }
    y = scheme == Scheme::Euler ? euler_step(field, y, t, dt)
                                    : rk4_step(field, y, t, t_next, dt);
    check_finite(y, step);
  }
  return y;
}

State integrate(const VectorField& field, const State& initial, double t0, double t1,
                const SolverConfig& config) {
  config.validate();
  return integrate(field, initial, uniform_grid(t0, t1, config.steps_per_window), config.scheme);
}

}  // namespace pad
