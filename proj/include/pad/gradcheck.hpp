#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pad/model.hpp"

namespace pad {

// Tape gradients of a combined two-task loss against central differences.
struct GradCheckConfig {
  ModelConfig model = tiny_model();
  SolverConfig solver{Scheme::Rk4, 16, false};
  std::size_t window_size = 8;
  std::size_t batch = 2;
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is ~0 are judged by absolute error instead.
  double floor = 1e-6;
  std::uint64_t seed = 0;

  static ModelConfig tiny_model();
};

struct GroupCheck {
  Group group = Group::F;
  std::size_t coordinates = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

struct GradCheckReport {
  std::vector<GroupCheck> groups;
  double max_rel_err = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

GradCheckReport gradient_check(const GradCheckConfig& config);

}  // namespace pad
