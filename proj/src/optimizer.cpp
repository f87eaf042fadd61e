#include "pad/optimizer.hpp"

#include <cmath>

#include "pad/errors.hpp"

namespace pad {

Gradients zero_gradients(const PadParameters& params) {
  Gradients g;
  for (Group grp : kAllGroups) {
    for (const Tensor& t : params[grp]) g[static_cast<std::size_t>(grp)].push_back(Tensor::zeros_like(t));
  }
  return g;
}

void add_into(Gradients& dst, const Gradients& src) {
  for (std::size_t k = 0; k < kGroupCount; ++k) {
    for (std::size_t i = 0; i < dst[k].size(); ++i) {
      auto d = dst[k][i].data();
      auto s = src[k][i].data();
      for (std::size_t j = 0; j < d.size(); ++j) d[j] += s[j];
    }
  }
}

void AdamW::step(PadParameters& params, GroupSet subset, const Gradients& grads) {
  for (Group g : kAllGroups) {
    if (!subset.contains(g)) continue;
    const auto k = static_cast<std::size_t>(g);
    if (grads[k].size() != params[g].size()) {
      throw DimensionError("gradient for group " + std::string(group_name(g)) + " has wrong arity");
    }
    for (const Tensor& t : grads[k]) {
      if (!t.all_finite()) {
        throw DivergenceError("non-finite gradient in parameter group " + std::string(group_name(g)));
      }
    }
  }

  const auto& c = config_;
  for (Group g : kAllGroups) {
    if (!subset.contains(g)) continue;
    const auto k = static_cast<std::size_t>(g);
    auto& tensors = params[g];
    if (tensors.empty()) continue;
    GroupState& st = state_[k];
    if (st.m.size() != tensors.size()) {
      st.m.clear();
      st.v.clear();
      for (const Tensor& t : tensors) {
        st.m.push_back(Tensor::zeros_like(t));
        st.v.push_back(Tensor::zeros_like(t));
      }
    }
    ++st.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      auto w = tensors[i].data();
      auto gr = grads[k][i].data();
      auto m = st.m[i].data();
      auto v = st.v[i].data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * gr[j];
        v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * gr[j] * gr[j];
        const double update = (m[j] / bc1) / (std::sqrt(v[j] / bc2) + c.eps) + c.weight_decay * w[j];
        w[j] -= c.learning_rate * update;
      }
    }
  }
}

}  // namespace pad
