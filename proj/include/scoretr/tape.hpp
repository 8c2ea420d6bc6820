#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scoretr {

class Tape;

/// Handle to one scalar node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::int32_t idx = -1;

  bool valid() const { return tape != nullptr && idx >= 0; }
  double value() const;
  double tangent() const;
};

enum class Op : std::uint8_t {
  Leaf, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sin, Cos, Tanh, Softplus,
  Max, Abs, Sum, Dot
};

/// Append-only arena of scalar nodes with recorded local partials.
/// Reverse sweeps yield exact first-order gradients; a numeric dual component
/// per node supports plain forward mode. Recording the dual arithmetic itself
/// (see DVar below) makes input derivatives differentiable a second time.
class Tape {
 public:
  Tape() {
    reserve_nodes(1 << 12);
    edge_parent_.reserve(1 << 14);
    edge_partial_.reserve(1 << 14);
  }

  void clear() {
    resize_nodes(0);
    edge_parent_.clear();
    edge_partial_.clear();
    tangent_active_ = false;
  }

  std::size_t size() const { return value_.size(); }

  /// Checkpoint/rollback: rewind truncates every node recorded after mark().
  std::size_t mark() const { return size(); }
  void rewind(std::size_t m) {
    if (m > size()) throw std::invalid_argument("rewind past end of tape");
    if (m == size()) return;
    std::size_t e = edge_first_[m];
    resize_nodes(m);
    edge_parent_.resize(e);
    edge_partial_.resize(e);
  }

  Var leaf(double value) {
    std::int32_t i = push_node(Op::Leaf, value, 0.0, 0);
    return {this, i};
  }
  Var constant(double value) { return leaf(value); }

  double value(Var v) const { return value_[check(v)]; }
  double tangent(Var v) const { return tangent_[check(v)]; }

  /// Seed the numeric forward-mode component of a leaf. Nodes recorded after
  /// seeding carry propagated tangents.
  void seed_tangent(Var v, double t) {
    tangent_[check(v)] = t;
    tangent_active_ = true;
  }

  // --- primitives ------------------------------------------------------

  Var add(Var a, Var b) { return binary(Op::Add, val(a) + val(b), a, 1.0, b, 1.0); }
  Var sub(Var a, Var b) { return binary(Op::Sub, val(a) - val(b), a, 1.0, b, -1.0); }
  Var mul(Var a, Var b) { return binary(Op::Mul, val(a) * val(b), a, val(b), b, val(a)); }

  Var div(Var a, Var b) {
    double bv = val(b);
    if (bv == 0.0) throw std::domain_error("div: division by zero");
    double v = val(a) / bv;
    return binary(Op::Div, v, a, 1.0 / bv, b, -v / bv);
  }

  Var neg(Var a) { return unary(Op::Neg, -val(a), a, -1.0); }

  Var pow(Var a, double p) {
    double av = val(a);
    double v = std::pow(av, p);
    double partial = (p == 0.0) ? 0.0 : p * std::pow(av, p - 1.0);
    if (!std::isfinite(v) || !std::isfinite(partial))
      throw std::domain_error("pow: non-finite value or derivative");
    return unary(Op::Pow, v, a, partial);
  }

  Var exp(Var a) {
    double v = std::exp(val(a));
    return unary(Op::Exp, v, a, v);
  }

  Var log(Var a) {
    double av = val(a);
    if (!(av > 0.0)) throw std::domain_error("log: non-positive argument");
    return unary(Op::Log, std::log(av), a, 1.0 / av);
  }

  Var sin(Var a) { return unary(Op::Sin, std::sin(val(a)), a, std::cos(val(a))); }
  Var cos(Var a) { return unary(Op::Cos, std::cos(val(a)), a, -std::sin(val(a))); }

  Var tanh(Var a) {
    double v = std::tanh(val(a));
    return unary(Op::Tanh, v, a, 1.0 - v * v);
  }

  Var softplus(Var a) {
    double av = val(a);
    double v = softplus_value(av);
    return unary(Op::Softplus, v, a, sigmoid_value(av));
  }

  Var max(Var a, Var b) {
    bool left = val(a) >= val(b);
    return binary(Op::Max, left ? val(a) : val(b), a, left ? 1.0 : 0.0, b,
                  left ? 0.0 : 1.0);
  }

  Var abs(Var a) {
    double av = val(a);
    double s = av > 0.0 ? 1.0 : (av < 0.0 ? -1.0 : 0.0);
    return unary(Op::Abs, std::abs(av), a, s);
  }

  Var sum(std::span<const Var> xs) {
    double v = 0.0;
    for (Var x : xs) v += val(x);
    std::int32_t i = push_node(Op::Sum, v, 0.0, xs.size());
    double t = 0.0;
    for (Var x : xs) {
      push_edge(x, 1.0);
      t += tangent_[static_cast<std::size_t>(x.idx)];
    }
    if (tangent_active_) tangent_[static_cast<std::size_t>(i)] = t;
    return {this, i};
  }

  Var dot(std::span<const Var> a, std::span<const Var> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) v += val(a[k]) * val(b[k]);
    std::int32_t i = push_node(Op::Dot, v, 0.0, 2 * a.size());
    double t = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      double av = val(a[k]), bv = val(b[k]);
      push_edge(a[k], bv);
      push_edge(b[k], av);
      t += bv * tangent_[static_cast<std::size_t>(a[k].idx)] +
           av * tangent_[static_cast<std::size_t>(b[k].idx)];
    }
    if (tangent_active_) tangent_[static_cast<std::size_t>(i)] = t;
    return {this, i};
  }

  // --- reverse mode ------------------------------------------------------

  /// Adjoint sweep from a scalar output. Adjoints of earlier sweeps are
  /// invalidated (stamped).
  void reverse(Var out) {
    std::size_t o = check(out);
    ++stamp_epoch_;
    stamp_.resize(size(), 0);
    adj_.resize(size(), 0.0);
    stamp_[o] = stamp_epoch_;
    adj_[o] = 1.0;
    for (std::size_t i = o + 1; i-- > 0;) {
      if (stamp_[i] != stamp_epoch_) continue;
      double a = adj_[i];
      if (a == 0.0) continue;
      std::size_t e0 = edge_first_[i];
      std::size_t e1 = i + 1 < edge_first_.size() ? edge_first_[i + 1] : edge_parent_.size();
      for (std::size_t e = e0; e < e1; ++e) {
        std::uint32_t p = edge_parent_[e];
        double contrib = a * edge_partial_[e];
        if (stamp_[p] != stamp_epoch_) {
          stamp_[p] = stamp_epoch_;
          adj_[p] = contrib;
        } else {
          adj_[p] += contrib;
        }
      }
    }
  }

  /// Adjoint of v from the most recent reverse(); 0 if v was not reached.
  double adjoint(Var v) const {
    std::size_t i = check(v);
    if (i >= stamp_.size() || stamp_[i] != stamp_epoch_) return 0.0;
    return adj_[i];
  }

  /// Exact reverse-mode gradient of out with respect to wrt.
  std::vector<double> gradient(Var out, std::span<const Var> wrt) {
    reverse(out);
    std::vector<double> g(wrt.size());
    for (std::size_t k = 0; k < wrt.size(); ++k) g[k] = adjoint(wrt[k]);
    return g;
  }

  static double softplus_value(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  static double sigmoid_value(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }

 private:
  double val(Var v) const { return value_[check(v)]; }

  std::size_t check(Var v) const {
    if (v.tape != this || v.idx < 0 || static_cast<std::size_t>(v.idx) >= size())
      throw std::invalid_argument("node does not belong to this tape");
    return static_cast<std::size_t>(v.idx);
  }

  void reserve_nodes(std::size_t n) {
    value_.reserve(n);
    tangent_.reserve(n);
    op_.reserve(n);
    edge_first_.reserve(n);
  }

  void resize_nodes(std::size_t n) {
    value_.resize(n);
    tangent_.resize(n);
    op_.resize(n);
    edge_first_.resize(n);
  }

  std::int32_t push_node(Op op, double v, double t, std::size_t /*n_edges*/) {
    std::size_t i = size();
    value_.push_back(v);
    tangent_.push_back(t);
    op_.push_back(op);
    edge_first_.push_back(edge_parent_.size());
    return static_cast<std::int32_t>(i);
  }

  void push_edge(Var p, double partial) {
    edge_parent_.push_back(static_cast<std::uint32_t>(check(p)));
    edge_partial_.push_back(partial);
  }

  Var unary(Op op, double v, Var a, double pa) {
    std::size_t ia = check(a);
    std::int32_t i = push_node(op, v, 0.0, 1);
    push_edge(a, pa);
    if (tangent_active_) tangent_[static_cast<std::size_t>(i)] = pa * tangent_[ia];
    return {this, i};
  }

  Var binary(Op op, double v, Var a, double pa, Var b, double pb) {
    std::size_t ia = check(a), ib = check(b);
    std::int32_t i = push_node(op, v, 0.0, 2);
    push_edge(a, pa);
    push_edge(b, pb);
    if (tangent_active_)
      tangent_[static_cast<std::size_t>(i)] = pa * tangent_[ia] + pb * tangent_[ib];
    return {this, i};
  }

  std::vector<double> value_;
  std::vector<double> tangent_;
  std::vector<Op> op_;
  std::vector<std::size_t> edge_first_;
  std::vector<std::uint32_t> edge_parent_;
  std::vector<double> edge_partial_;

  std::vector<double> adj_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_epoch_ = 0;
  bool tangent_active_ = false;
};

inline double Var::value() const { return tape->value(*this); }
inline double Var::tangent() const { return tape->tangent(*this); }

// --- Var expression helpers ----------------------------------------------

inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.tape->div(a, b); }
inline Var operator-(Var a) { return a.tape->neg(a); }
inline Var operator+(Var a, double b) { return a + a.tape->constant(b); }
inline Var operator+(double a, Var b) { return b.tape->constant(a) + b; }
inline Var operator-(Var a, double b) { return a - a.tape->constant(b); }
inline Var operator-(double a, Var b) { return b.tape->constant(a) - b; }
inline Var operator*(Var a, double b) { return a * a.tape->constant(b); }
inline Var operator*(double a, Var b) { return b.tape->constant(a) * b; }
inline Var operator/(Var a, double b) { return a / a.tape->constant(b); }
inline Var operator/(double a, Var b) { return b.tape->constant(a) / b; }

inline Var pow(Var a, double p) { return a.tape->pow(a, p); }
inline Var exp(Var a) { return a.tape->exp(a); }
inline Var log(Var a) { return a.tape->log(a); }
inline Var sin(Var a) { return a.tape->sin(a); }
inline Var cos(Var a) { return a.tape->cos(a); }
inline Var tanh(Var a) { return a.tape->tanh(a); }
inline Var softplus(Var a) { return a.tape->softplus(a); }
inline Var max(Var a, Var b) { return a.tape->max(a, b); }
inline Var abs(Var a) { return a.tape->abs(a); }
inline Var sum(std::span<const Var> xs) { return xs[0].tape->sum(xs); }
inline Var dot(std::span<const Var> a, std::span<const Var> b) { return a[0].tape->dot(a, b); }

/// Numerically stable recorded sigmoid, composed from primitives so that it
/// stays differentiable to second order.
inline Var sigmoid(Var a) { return 0.5 * tanh(a * 0.5) + 0.5; }

// --- recorded duals --------------------------------------------------------
//
// A DVar pairs a value node with a tangent node. Every dual arithmetic step
// records both the primal operation and the tangent-propagation expression,
// so the tangent of the final output is itself a node whose reverse-mode
// gradient gives mixed second derivatives. An invalid tangent handle means
// the tangent is structurally zero; operations skip the corresponding terms,
// which keeps the recorded tangent graph confined to the paths that actually
// depend on the seeded input.

struct DVar {
  Var v;
  Var t;

  bool has_tangent() const { return t.valid(); }
};

inline DVar dual(Var v) { return {v, Var{}}; }
inline DVar dual_constant(Tape& tape, double c) { return {tape.constant(c), Var{}}; }

/// Leaf with tangent seeded to 1: the input being differentiated.
inline DVar seeded_input(Tape& tape, double value) {
  return {tape.leaf(value), tape.constant(1.0)};
}

inline DVar operator+(DVar a, DVar b) {
  Var v = a.v + b.v;
  Var t;
  if (a.has_tangent() && b.has_tangent()) t = a.t + b.t;
  else if (a.has_tangent()) t = a.t;
  else if (b.has_tangent()) t = b.t;
  return {v, t};
}

inline DVar operator-(DVar a, DVar b) {
  Var v = a.v - b.v;
  Var t;
  if (a.has_tangent() && b.has_tangent()) t = a.t - b.t;
  else if (a.has_tangent()) t = a.t;
  else if (b.has_tangent()) t = -b.t;
  return {v, t};
}

inline DVar operator-(DVar a) { return {-a.v, a.has_tangent() ? -a.t : Var{}}; }

inline DVar operator*(DVar a, DVar b) {
  Var v = a.v * b.v;
  Var t;
  if (a.has_tangent() && b.has_tangent()) t = b.v * a.t + a.v * b.t;
  else if (a.has_tangent()) t = b.v * a.t;
  else if (b.has_tangent()) t = a.v * b.t;
  return {v, t};
}

inline DVar operator/(DVar a, DVar b) {
  Var v = a.v / b.v;
  Var t;
  if (a.has_tangent() && b.has_tangent()) t = (a.t - v * b.t) / b.v;
  else if (a.has_tangent()) t = a.t / b.v;
  else if (b.has_tangent()) t = -(v * b.t) / b.v;
  return {v, t};
}

inline DVar operator+(DVar a, double c) { return {a.v + c, a.t}; }
inline DVar operator+(double c, DVar a) { return {c + a.v, a.t}; }
inline DVar operator-(DVar a, double c) { return {a.v - c, a.t}; }
inline DVar operator*(DVar a, double c) {
  return {a.v * c, a.has_tangent() ? a.t * c : Var{}};
}
inline DVar operator*(double c, DVar a) { return a * c; }
inline DVar operator/(DVar a, double c) {
  return {a.v / c, a.has_tangent() ? a.t / c : Var{}};
}

inline DVar pow(DVar a, double p) {
  Var v = pow(a.v, p);
  Var t;
  if (a.has_tangent()) t = (p * pow(a.v, p - 1.0)) * a.t;
  return {v, t};
}

inline DVar exp(DVar a) {
  Var v = exp(a.v);
  return {v, a.has_tangent() ? v * a.t : Var{}};
}

inline DVar log(DVar a) {
  Var v = log(a.v);
  return {v, a.has_tangent() ? a.t / a.v : Var{}};
}

inline DVar sin(DVar a) {
  Var v = sin(a.v);
  return {v, a.has_tangent() ? cos(a.v) * a.t : Var{}};
}

inline DVar cos(DVar a) {
  Var v = cos(a.v);
  return {v, a.has_tangent() ? -(sin(a.v) * a.t) : Var{}};
}

inline DVar tanh(DVar a) {
  Var v = tanh(a.v);
  return {v, a.has_tangent() ? (1.0 - v * v) * a.t : Var{}};
}

inline DVar softplus(DVar a) {
  Var v = softplus(a.v);
  return {v, a.has_tangent() ? sigmoid(a.v) * a.t : Var{}};
}

inline DVar max(DVar a, DVar b) {
  Var v = max(a.v, b.v);
  return {v, a.v.value() >= b.v.value() ? a.t : b.t};
}

inline DVar abs(DVar a) {
  Var v = abs(a.v);
  double av = a.v.value();
  Var t;
  if (a.has_tangent() && av != 0.0) t = av > 0.0 ? a.t : -a.t;
  return {v, t};
}

inline DVar sum(std::span<const DVar> xs) {
  Tape& tape = *xs[0].v.tape;
  thread_local std::vector<Var> vals, tans;
  vals.clear();
  tans.clear();
  for (DVar x : xs) {
    vals.push_back(x.v);
    if (x.has_tangent()) tans.push_back(x.t);
  }
  Var v = tape.sum(vals);
  Var t;
  if (tans.size() == 1) t = tans[0];
  else if (!tans.empty()) t = tape.sum(tans);
  return {v, t};
}

inline DVar dot(std::span<const DVar> a, std::span<const DVar> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  Tape& tape = *a[0].v.tape;
  thread_local std::vector<Var> av, bv, ta1, ta2, tb1, tb2;
  av.clear(); bv.clear(); ta1.clear(); ta2.clear(); tb1.clear(); tb2.clear();
  for (std::size_t k = 0; k < a.size(); ++k) {
    av.push_back(a[k].v);
    bv.push_back(b[k].v);
    if (a[k].has_tangent()) {   // sum_k b_k * da_k
      ta1.push_back(b[k].v);
      ta2.push_back(a[k].t);
    }
    if (b[k].has_tangent()) {   // sum_k a_k * db_k
      tb1.push_back(a[k].v);
      tb2.push_back(b[k].t);
    }
  }
  Var v = tape.dot(av, bv);
  Var t;
  if (!ta1.empty()) t = tape.dot(ta1, ta2);
  if (!tb1.empty()) {
    Var t2 = tape.dot(tb1, tb2);
    t = t.valid() ? t + t2 : t2;
  }
  return {v, t};
}

/// Derivative of a scalar tape computation with respect to one scalar input,
/// returned as a node: f is evaluated in recorded dual arithmetic with the
/// input's tangent seeded to one, so the result stays differentiable with
/// respect to everything else on the tape.
template <class F>
Var input_derivative(Tape& tape, F&& f, double x_value) {
  DVar x = seeded_input(tape, x_value);
  DVar out = std::forward<F>(f)(x);
  if (!out.has_tangent()) return tape.constant(0.0);
  return out.t;
}

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
/// for a scalar function built by f on a fresh tape from leaf inputs.
template <class F>
double gradcheck(F&& f, std::span<const double> point, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("gradcheck: h must be positive");
  auto eval = [&](std::span<const double> p) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(p.size());
    for (double x : p) leaves.push_back(tape.leaf(x));
    Var out = f(tape, std::span<const Var>(leaves));
    return tape.value(out);
  };

  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (double x : point) leaves.push_back(tape.leaf(x));
  Var out = f(tape, std::span<const Var>(leaves));
  std::vector<double> analytic = tape.gradient(out, leaves);

  std::vector<double> p(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double saved = p[k];
    p[k] = saved + h;
    double up = eval(p);
    p[k] = saved - h;
    double down = eval(p);
    p[k] = saved;
    double fd = (up - down) / (2.0 * h);
    if (!std::isfinite(fd) || !std::isfinite(analytic[k]))
      throw std::domain_error("gradcheck: non-finite value");
    double err = std::abs(analytic[k] - fd) / std::max(1.0, std::abs(analytic[k]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace scoretr
