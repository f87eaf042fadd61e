#include "pad/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "pad/errors.hpp"

namespace pad {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an unbound Var");
  return tape_->value(id_);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor{}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id()].needs_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor{}, needs ? std::move(backward) : nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::adjoint(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor::zeros_like(n.value);
  return n.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss);
  if (differentiated_) {
    throw ContractError("backward() called twice on the same tape without clear()");
  }
  if (nodes_[loss.id()].value.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        nodes_[loss.id()].value.shape_string());
  }
  differentiated_ = true;
  adjoint(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, i);
  }
}

Tensor Tape::grad(Var v) const {
  check_owner(v);
  const Node& n = nodes_[v.id()];
  if (n.grad.size() == n.value.size() && n.value.size() != 0) return n.grad;
  return Tensor::zeros_like(n.value);
}

bool Tape::reached(Var v) const {
  check_owner(v);
  const Node& n = nodes_[v.id()];
  return n.grad.size() != 0 && n.grad.size() == n.value.size();
}

bool Tape::requires_grad(Var v) const {
  check_owner(v);
  return nodes_[v.id()].needs_grad;
}

void Tape::clear() {
  nodes_.clear();
  differentiated_ = false;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce(double target, double predicted, double eps) {
  const double q = std::clamp(predicted, eps, 1.0 - eps);
  return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

namespace ad {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

Tape& tape_of(Var v) {
  if (!v.valid()) throw ContractError("operation on an unbound Var");
  return *v.tape();
}

// Shared shape for elementwise unary maps; `derivative` receives (input, output).
template <typename Fwd, typename Deriv>
Var unary(Var x, Fwd forward, Deriv derivative) {
  Tape& tape = tape_of(x);
  const Tensor& in = x.value();
  Tensor out = Tensor::zeros_like(in);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  const std::size_t xi = x.id();
  const Var inputs[] = {x};
  return tape.record(std::move(out), inputs, [xi, derivative](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    const Tensor& in = t.value(xi);
    const Tensor& out = t.value(self);
    Tensor& gx = t.adjoint(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * derivative(in[i], out[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a);
  Tensor out = matmul_raw(a.value(), b.value());
  const std::size_t ai = a.id(), bi = b.id();
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    if (t.needs_grad(ai)) accumulate(t.adjoint(ai), matmul_raw(g, transpose(t.value(bi))));
    if (t.needs_grad(bi)) accumulate(t.adjoint(bi), matmul_raw(transpose(t.value(ai)), g));
  });
}

Var affine(Var x, Var weight, Var bias) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw DimensionError("affine: x" + xv.shape_string() + " W" + wv.shape_string() + " b" +
                         bv.shape_string());
  }
  Tensor out = matmul_raw(xv, wv);
  const std::size_t n = out.cols();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += bv[c];

  const std::size_t xi = x.id(), wi = weight.id(), bi = bias.id();
  const Var inputs[] = {x, weight, bias};
  return tape.record(std::move(out), inputs, [xi, wi, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    if (t.needs_grad(xi)) accumulate(t.adjoint(xi), matmul_raw(g, transpose(t.value(wi))));
    if (t.needs_grad(wi)) accumulate(t.adjoint(wi), matmul_raw(transpose(t.value(xi)), g));
    if (t.needs_grad(bi)) {
      Tensor& gb = t.adjoint(bi);
      const std::size_t n = g.cols();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += g(r, c);
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  const std::size_t ai = a.id(), bi = b.id();
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    if (t.needs_grad(ai)) accumulate(t.adjoint(ai), g);
    if (t.needs_grad(bi)) accumulate(t.adjoint(bi), g);
  });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    if (t.needs_grad(ai)) accumulate(t.adjoint(ai), g);
    if (t.needs_grad(bi)) {
      Tensor& gb = t.adjoint(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  const Var inputs[] = {a, b};
  return tape.record(std::move(out), inputs, [ai, bi](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    if (t.needs_grad(ai)) {
      Tensor& ga = t.adjoint(ai);
      const Tensor& bv = t.value(bi);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.needs_grad(bi)) {
      Tensor& gb = t.adjoint(bi);
      const Tensor& av = t.value(ai);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(a, [factor](double v) { return factor * v; },
               [factor](double, double) { return factor; });
}

Var relu(Var x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var x) {
  return unary(x, [](double v) { return std::tanh(v); },
               [](double, double out) { return 1.0 - out * out; });
}

Var sigmoid(Var x) {
  return unary(x, [](double v) { return pad::sigmoid(v); },
               [](double, double out) { return out * (1.0 - out); });
}

Var add_scaled_rows(Var y, Var k, std::span<const double> row_scale) {
  Tape& tape = tape_of(y);
  const Tensor& yv = y.value();
  const Tensor& kv = k.value();
  require_same_shape(yv, kv, "add_scaled_rows");
  if (row_scale.size() != yv.rows()) {
    throw DimensionError("add_scaled_rows: " + std::to_string(row_scale.size()) +
                         " scales for " + std::to_string(yv.rows()) + " rows");
  }
  Tensor out = yv;
  const std::size_t n = yv.cols();
  for (std::size_t r = 0; r < yv.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += row_scale[r] * kv(r, c);

  std::vector<double> scales(row_scale.begin(), row_scale.end());
  const std::size_t yi = y.id(), ki = k.id();
  const Var inputs[] = {y, k};
  return tape.record(std::move(out), inputs,
                     [yi, ki, scales = std::move(scales)](Tape& t, std::size_t self) {
                       const Tensor& g = t.adjoint_of_self(self);
                       if (t.needs_grad(yi)) accumulate(t.adjoint(yi), g);
                       if (t.needs_grad(ki)) {
                         Tensor& gk = t.adjoint(ki);
                         const std::size_t n = g.cols();
                         for (std::size_t r = 0; r < g.rows(); ++r)
                           for (std::size_t c = 0; c < n; ++c) gk(r, c) += scales[r] * g(r, c);
                       }
                     });
}

Var combine(std::span<const Var> terms, std::span<const double> coeffs) {
  if (terms.empty() || terms.size() != coeffs.size()) {
    throw DimensionError("combine: need one coefficient per term");
  }
  Tape& tape = tape_of(terms[0]);
  Tensor out = Tensor::zeros_like(terms[0].value());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const Tensor& v = terms[j].value();
    require_same_shape(out, v, "combine");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeffs[j] * v[i];
  }
  std::vector<std::size_t> ids;
  for (const Var& v : terms) ids.push_back(v.id());
  std::vector<double> cs(coeffs.begin(), coeffs.end());
  return tape.record(std::move(out), terms,
                     [ids = std::move(ids), cs = std::move(cs)](Tape& t, std::size_t self) {
                       const Tensor& g = t.adjoint_of_self(self);
                       for (std::size_t j = 0; j < ids.size(); ++j) {
                         if (!t.needs_grad(ids[j])) continue;
                         Tensor& gj = t.adjoint(ids[j]);
                         for (std::size_t i = 0; i < g.size(); ++i) gj[i] += cs[j] * g[i];
                       }
                     });
}

Var contract_rows(Var field, Var control) {
  Tape& tape = tape_of(field);
  const Tensor& fv = field.value();
  const Tensor& cv = control.value();
  const std::size_t batch = fv.rows();
  const std::size_t n = cv.cols();
  if (cv.rows() != batch || n == 0 || fv.cols() % n != 0) {
    throw DimensionError("contract_rows: field " + fv.shape_string() + " vs control " +
                         cv.shape_string());
  }
  const std::size_t m = fv.cols() / n;
  Tensor out(batch, m);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* frow = fv.data().data() + b * fv.cols();
    const double* crow = cv.data().data() + b * n;
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += frow[i * n + j] * crow[j];
      out(b, i) = acc;
    }
  }
  const std::size_t fi = field.id(), ci = control.id();
  const Var inputs[] = {field, control};
  return tape.record(std::move(out), inputs, [fi, ci, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.adjoint_of_self(self);
    const Tensor& fv = t.value(fi);
    const Tensor& cv = t.value(ci);
    const bool need_f = t.needs_grad(fi), need_c = t.needs_grad(ci);
    Tensor* gf = need_f ? &t.adjoint(fi) : nullptr;
    Tensor* gc = need_c ? &t.adjoint(ci) : nullptr;
    for (std::size_t b = 0; b < g.rows(); ++b) {
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g(b, i);
        for (std::size_t j = 0; j < n; ++j) {
          if (gf) (*gf)(b, i * n + j) += gi * cv(b, j);
          if (gc) (*gc)(b, j) += gi * fv(b, i * n + j);
        }
      }
    }
  });
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t ai = a.id();
  const Var inputs[] = {a};
  return tape.record(Tensor::scalar(total), inputs, [ai](Tape& t, std::size_t self) {
    const double g = t.adjoint_of_self(self)[0];
    Tensor& ga = t.adjoint(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var bce_mean(Var predicted, const Tensor& target, double eps) {
  Tape& tape = tape_of(predicted);
  const Tensor& q = predicted.value();
  require_same_shape(q, target, "bce_mean");
  if (q.size() == 0) throw DimensionError("bce_mean of an empty tensor");
  const double inv_n = 1.0 / static_cast<double>(q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += bce(target[i], q[i], eps);
  const std::size_t qi = predicted.id();
  const Var inputs[] = {predicted};
  return tape.record(Tensor::scalar(total * inv_n), inputs,
                     [qi, target, eps, inv_n](Tape& t, std::size_t self) {
                       const double g = t.adjoint_of_self(self)[0];
                       const Tensor& q = t.value(qi);
                       Tensor& gq = t.adjoint(qi);
                       for (std::size_t i = 0; i < q.size(); ++i) {
                         // The clamp is flat outside [eps, 1 - eps].
                         if (q[i] < eps || q[i] > 1.0 - eps) continue;
                         const double ti = target[i];
                         gq[i] += g * inv_n * (-(ti / q[i]) + (1.0 - ti) / (1.0 - q[i]));
                       }
                     });
}

}  // namespace ad
}  // namespace pad
