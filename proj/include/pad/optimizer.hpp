#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pad/model.hpp"

namespace pad {

// Same layout as PadParameters: one tensor per parameter tensor.
using Gradients = std::array<std::vector<Tensor>, kGroupCount>;

Gradients zero_gradients(const PadParameters& params);
void add_into(Gradients& dst, const Gradients& src);

struct AdamConfig {
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam with decoupled weight decay. Moments and step counts
// are kept per group, so the same group can be updated from several losses.
class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  std::size_t steps(Group g) const noexcept { return state_[static_cast<std::size_t>(g)].step; }

  // Updates only the groups in `subset`. Throws DivergenceError naming the
  // group on a non-finite gradient (before any tensor is modified).
  void step(PadParameters& params, GroupSet subset, const Gradients& grads);

 private:
  struct GroupState {
    std::size_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
  };
  AdamConfig config_;
  std::array<GroupState, kGroupCount> state_;
};

}  // namespace pad
