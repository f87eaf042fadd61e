#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pad/tensor.hpp"

namespace pad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Operations append nodes in evaluation order; backward()
// walks them in reverse and accumulates adjoints. Single-threaded: use one
// tape per thread and reduce gradients afterwards.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives a gradient.
  Var variable(Tensor value);
  // Leaf that never receives a gradient (data, detached teacher outputs).
  Var constant(Tensor value);

  // Appends a derived node. `backward` is dropped when no input needs a gradient.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. The loss must hold one element,
  // and a tape can only be differentiated once until clear() is called.
  void backward(Var loss);

  // Adjoint of a node; zeros when the node was not reached from the loss.
  Tensor grad(Var v) const;
  bool reached(Var v) const;
  bool requires_grad(Var v) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Adjoint accumulator for use inside backward functions (allocated lazily).
  Tensor& adjoint(std::size_t id);
  const Tensor& adjoint_of_self(std::size_t id) const { return nodes_[id].grad; }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool needs_grad = false;
  };

  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  bool differentiated_ = false;
};

namespace ad {

Var matmul(Var a, Var b);
// x[B×in] · W[in×out] + b[1×out], bias broadcast over rows.
Var affine(Var x, Var weight, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);

// y + diag(row_scale)·k, one scale per row.
Var add_scaled_rows(Var y, Var k, std::span<const double> row_scale);
// Σ coeffs[i]·terms[i]; all terms share one shape.
Var combine(std::span<const Var> terms, std::span<const double> coeffs);
// Per row b: out[b, i] = Σ_j field[b, i·n + j] · control[b, j], with
// field of shape B×(m·n) and control of shape B×n. Produces B×m.
Var contract_rows(Var field, Var control);

Var sum(Var a);
Var mean(Var a);
// Mean binary cross-entropy of predicted probabilities against (soft) targets.
Var bce_mean(Var predicted, const Tensor& target, double eps = 1e-7);

}  // namespace ad

// Clamp used by every cross-entropy in the library.
inline constexpr double kProbabilityEps = 1e-7;
// −[t·ln q + (1−t)·ln(1−q)] with q clamped to [eps, 1−eps].
double bce(double target, double predicted, double eps = kProbabilityEps);
double sigmoid(double x);

}  // namespace pad
