#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pad/autodiff.hpp"
#include "pad/ode.hpp"
#include "pad/spline.hpp"

namespace pad {

struct ModelConfig {
  std::size_t n_channels = 1;
  std::size_t hidden_dim = 8;  // size of h and z
  std::size_t width_f = 32;
  std::size_t width_g = 32;
  std::size_t width_c = 32;
  std::size_t n_hidden_layers_f = 4;
  std::size_t n_hidden_layers_g = 4;
  std::size_t n_hidden_layers_c = 1;
  // false removes the shared branch entirely (ablation model).
  bool shared_branch = true;
  // Appends t as an extra path channel.
  bool append_time = false;

  std::size_t path_channels() const noexcept { return n_channels + (append_time ? 1 : 0); }
  std::size_t field_outputs() const noexcept { return hidden_dim * path_channels(); }
  void validate() const;
};

// Trainable parameter groups. f and g are the task-specific vector-field
// branches, c the branch both fields share, h/z the initial-state maps and
// a/p the anomaly and precursor heads.
enum class Group : std::size_t { F = 0, G, C, H, Z, A, P };
inline constexpr std::size_t kGroupCount = 7;
inline constexpr std::array<Group, kGroupCount> kAllGroups = {
    Group::F, Group::G, Group::C, Group::H, Group::Z, Group::A, Group::P};

std::string_view group_name(Group group);
Group parse_group(std::string_view name);

class GroupSet {
 public:
  constexpr GroupSet() = default;
  constexpr GroupSet(std::initializer_list<Group> groups) {
    for (Group g : groups) bits_ |= bit(g);
  }
  static constexpr GroupSet all() {
    GroupSet s;
    s.bits_ = (1u << kGroupCount) - 1;
    return s;
  }
  constexpr bool contains(Group g) const { return (bits_ & bit(g)) != 0; }

 private:
  static constexpr unsigned bit(Group g) { return 1u << static_cast<unsigned>(g); }
  unsigned bits_ = 0;
};

// Each group is a flat list of tensors: weight (in x out), bias (1 x out), ...
struct PadParameters {
  std::array<std::vector<Tensor>, kGroupCount> groups;

  std::vector<Tensor>& operator[](Group g) { return groups[static_cast<std::size_t>(g)]; }
  const std::vector<Tensor>& operator[](Group g) const {
    return groups[static_cast<std::size_t>(g)];
  }
  std::size_t count(Group g) const;
  std::size_t total_count() const;
  // FNV-1a over the raw bytes of a group; used to prove a group was untouched.
  std::uint64_t hash(Group g) const;

  friend bool operator==(const PadParameters&, const PadParameters&) = default;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
PadParameters init_parameters(const ModelConfig& config, std::uint64_t seed);

// Widths for a model without the shared branch whose parameter count matches
// `config` as closely as possible (f and g widened by the same factor).
ModelConfig rebalance_without_shared(const ModelConfig& config);

// Parameters registered on a tape. Groups outside `trainable` are constants.
struct BoundParameters {
  std::array<std::vector<Var>, kGroupCount> vars;
  const std::vector<Var>& operator[](Group g) const { return vars[static_cast<std::size_t>(g)]; }
};
BoundParameters bind(Tape& tape, const PadParameters& params, GroupSet trainable = GroupSet::all());

// MLP: ReLU on hidden layers, tanh on the output layer.
Var mlp_tanh(Var x, std::span<const Var> layers);

// f(h) = tanh-MLP_f(h) + tanh-MLP_c(h), rows of shape hidden x channels flattened.
Var vector_field_f(Var h, const BoundParameters& params, const ModelConfig& config);
Var vector_field_g(Var z, const BoundParameters& params, const ModelConfig& config);

struct InitialStates {
  Var h0;
  Var z0;
};
// Affine images of X(0) (rows = batch).
InitialStates init_states(Var x0, const BoundParameters& params);

struct Branches {
  bool anomaly = true;
  bool poa = true;
};

struct BatchOutput {
  Var p_anomaly;  // B x 1, invalid when the branch was skipped
  Var p_poa;
  Var h_final;
  Var z_final;
};

// Prepares one window for the solver: spline of the (optionally time-augmented) path.
CubicSplinePath build_path(const TimeSeriesWindow& window, const ModelConfig& config);

// Co-evolving forward pass for a batch. With knot-aligned solving all
// windows must share an observation count. Divergence is rethrown with the
// first window index of the batch attached.
BatchOutput forward_batch(Tape& tape, const BoundParameters& params,
                          std::span<const TimeSeriesWindow* const> windows,
                          const ModelConfig& model, const SolverConfig& solver,
                          Branches branches = {});

struct ForwardResult {
  double p_anomaly = 0.0;
  double p_poa = 0.0;
  std::vector<double> h_final;
  std::vector<double> z_final;
};

ForwardResult forward(const TimeSeriesWindow& window, const PadParameters& params,
                      const ModelConfig& model, const SolverConfig& solver);

struct Prediction {
  std::vector<double> p_anomaly;
  std::vector<double> p_poa;
};
// Inference over any list of windows (grouped internally by observation count).
Prediction predict(std::span<const TimeSeriesWindow> windows, const PadParameters& params,
                   const ModelConfig& model, const SolverConfig& solver,
                   std::size_t chunk = 64, Branches branches = {});

}  // namespace pad
