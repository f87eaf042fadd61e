#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pad/autodiff.hpp"

namespace pad {

enum class Scheme { Euler, Rk4 };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct SolverConfig {
  Scheme scheme = Scheme::Rk4;
  // Substeps per inter-knot interval when knot_aligned, otherwise uniform
  // steps across the whole window.
  std::size_t steps_per_window = 4;
  bool knot_aligned = true;

  void validate() const;
};

// Per-row integration times. Every row advances the same number of steps,
// but each row has its own step sizes (irregular windows in one batch).
class TimeGrid {
 public:
  TimeGrid(std::size_t rows, std::size_t steps);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t steps() const noexcept { return steps_; }
  double& at(std::size_t row, std::size_t point) { return times_[row * (steps_ + 1) + point]; }
  double at(std::size_t row, std::size_t point) const {
    return times_[row * (steps_ + 1) + point];
  }

 private:
  std::size_t rows_;
  std::size_t steps_;
  std::vector<double> times_;
};

TimeGrid uniform_grid(double t0, double t1, std::size_t steps);
// Builds the grid for a batch of knot sequences. Knot-aligned grids need all
// rows to share a knot count.
TimeGrid make_time_grid(std::span<const std::vector<double>> knots, const SolverConfig& config);

// Integration state: a set of row-batched tensors advanced together, such as [h; z].
using State = std::vector<Var>;
// d(state)/dt at per-row times.
using VectorField = std::function<State(const State&, std::span<const double> t)>;

// Explicit fixed-step solve over the grid. Every stage is recorded on the
// tape, so backward() through the result differentiates the discrete map.
// Throws DivergenceError naming the step when a state stops being finite.
State integrate(const VectorField& field, const State& initial, const TimeGrid& grid,
                Scheme scheme);
State integrate(const VectorField& field, const State& initial, double t0, double t1,
                const SolverConfig& config);

}  // namespace pad
