// Dense 1-D/2-D arrays with tape-based reverse-mode differentiation.
// Templated on the scalar type: float for training, double for gradient
// checks. Shapes are only as general as the models downstream need.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "irony/rng.hpp"

namespace irony {

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;
  bool requires_grad = false;
  std::vector<T> grad;

  Tensor() = default;
  Tensor(std::vector<std::size_t> sh, bool rg = false) : shape(std::move(sh)), requires_grad(rg) {
    data.assign(count(shape), T(0));
    if (requires_grad) grad.assign(data.size(), T(0));
  }
  Tensor(std::vector<std::size_t> sh, std::vector<T> d, bool rg = false)
      : shape(std::move(sh)), data(std::move(d)), requires_grad(rg) {
    if (data.size() != count(shape))
      throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
    if (requires_grad) grad.assign(data.size(), T(0));
  }

  static std::size_t count(const std::vector<std::size_t>& sh) {
    std::size_t n = 1;
    for (auto d : sh) n *= d;
    return n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }

  void zero_grad() {
    if (requires_grad) grad.assign(data.size(), T(0));
  }

  void fill_uniform(Pcg32& rng, double lo, double hi) {
    for (auto& v : data) v = static_cast<T>(rng.uniform(lo, hi));
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.requires_grad = requires_grad;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    if (requires_grad) out.grad.assign(data.size(), U(0));
    return out;
  }
};

// One recording of a computation. Ops append nodes plus a backward closure;
// backward() replays closures in reverse, accumulates into every
// requires_grad leaf's .grad and clears the tape.
template <typename T>
class Tape {
 public:
  struct Var {
    std::uint32_t id = 0;
  };

  Var leaf(Tensor<T>& t) {
    Node n;
    n.shape = t.shape;
    n.leaf = &t;
    return push(std::move(n));
  }

  Var constant(std::vector<std::size_t> shape, std::vector<T> data) {
    Node n;
    n.shape = std::move(shape);
    n.val = std::move(data);
    if (n.val.size() != Tensor<T>::count(n.shape))
      throw std::invalid_argument("constant data does not match shape " + shape_str(n.shape));
    return push(std::move(n));
  }

  Var scalar(T v) { return constant({1}, {v}); }

  const std::vector<std::size_t>& shape(Var v) const { return nodes_[v.id].shape; }
  const std::vector<T>& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.leaf ? n.leaf->data : n.val;
  }
  T value_scalar(Var v) const {
    if (value(v).size() != 1)
      throw std::invalid_argument("expected scalar, got shape " + shape_str(shape(v)));
    return value(v)[0];
  }

  // ---- primitives ------------------------------------------------------

  // (m,k)x(k,n) -> (m,n); also matrix-vector (m,k)x(k) -> (m) and
  // vector-matrix (k)x(k,n) -> (n).
  Var matmul(Var a, Var b) {
    const auto& sa = shape(a);
    const auto& sb = shape(b);
    std::size_t m, k, n;
    bool a_vec = sa.size() == 1, b_vec = sb.size() == 1;
    if (a_vec && !b_vec) {
      m = 1; k = sa[0];
      if (sb[0] != k) mismatch("matmul", sa, sb);
      n = sb[1];
    } else if (!a_vec && b_vec) {
      m = sa[0]; k = sa[1];
      if (sb[0] != k) mismatch("matmul", sa, sb);
      n = 1;
    } else if (!a_vec && !b_vec) {
      m = sa[0]; k = sa[1];
      if (sb[0] != k) mismatch("matmul", sa, sb);
      n = sb[1];
    } else {
      mismatch("matmul", sa, sb);
      return {};
    }
    const auto& va = value(a);
    const auto& vb = value(b);
    std::vector<T> out(m * n, T(0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        T av = va[i * k + p];
        if (av == T(0)) continue;
        const T* brow = vb.data() + p * n;
        T* orow = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    std::vector<std::size_t> osh;
    if (a_vec) osh = {n};
    else if (b_vec) osh = {m};
    else osh = {m, n};
    Var o = make(std::move(osh), std::move(out));
    record([this, a, b, o, m, k, n] {
      const auto& g = grad_of(o);
      const auto& va2 = value(a);
      const auto& vb2 = value(b);
      auto& ga = grad_of(a);
      auto& gb = grad_of(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          T gv = g[i * n + j];
          if (gv == T(0)) continue;
          for (std::size_t p = 0; p < k; ++p) {
            ga[i * k + p] += gv * vb2[p * n + j];
            gb[p * n + j] += gv * va2[i * k + p];
          }
        }
    });
    return o;
  }

  // Elementwise; b may be a 1-element tensor broadcast over a.
  Var add(Var a, Var b) { return binary(a, b, "add", [](T x, T y) { return x + y; },
                                        [](T, T, T g) { return std::pair<T, T>{g, g}; }); }

  Var mul(Var a, Var b) {
    return binary(a, b, "mul", [](T x, T y) { return x * y; },
                  [](T x, T y, T g) { return std::pair<T, T>{g * y, g * x}; });
  }

  Var sub(Var a, Var b) { return binary(a, b, "sub", [](T x, T y) { return x - y; },
                                        [](T, T, T g) { return std::pair<T, T>{g, -g}; }); }

  Var scale(Var a, T c) {
    const auto& va = value(a);
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] * c;
    Var o = make(shape(a), std::move(out));
    record([this, a, o, c] {
      const auto& g = grad_of(o);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
    return o;
  }

  Var tanh_(Var a) {
    const auto& va = value(a);
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = std::tanh(va[i]);
    Var o = make(shape(a), std::move(out));
    record([this, a, o] {
      const auto& g = grad_of(o);
      const auto& y = value(o);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (T(1) - y[i] * y[i]);
    });
    return o;
  }

  Var sigmoid_(Var a) {
    const auto& va = value(a);
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      T x = va[i];
      out[i] = x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                         : std::exp(x) / (T(1) + std::exp(x));
    }
    Var o = make(shape(a), std::move(out));
    record([this, a, o] {
      const auto& g = grad_of(o);
      const auto& y = value(o);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
    });
    return o;
  }

  // log(max(x, 1e-12)); gradient is zero in the clamped region.
  Var log_(Var a) {
    const T floor_v = static_cast<T>(1e-12);
    const auto& va = value(a);
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = std::log(std::max(va[i], floor_v));
    Var o = make(shape(a), std::move(out));
    record([this, a, o, floor_v] {
      const auto& g = grad_of(o);
      const auto& x = value(a);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (x[i] > floor_v) ga[i] += g[i] / x[i];
    });
    return o;
  }

  // Max-subtracted softmax. 1-D tensors, or 2-D along rows (axis=1) /
  // columns (axis=0).
  Var softmax(Var a, int axis = -1) {
    const auto& sa = shape(a);
    const auto& va = value(a);
    std::vector<T> out(va.size());
    std::size_t groups, len, stride_in_group, stride_between;
    if (sa.size() == 1) {
      groups = 1; len = sa[0]; stride_in_group = 1; stride_between = 0;
    } else if (sa.size() == 2 && (axis == 1 || axis == -1)) {
      groups = sa[0]; len = sa[1]; stride_in_group = 1; stride_between = sa[1];
    } else if (sa.size() == 2 && axis == 0) {
      groups = sa[1]; len = sa[0]; stride_in_group = sa[1]; stride_between = 1;
    } else {
      throw std::invalid_argument("softmax: unsupported shape " + shape_str(sa) +
                                  " axis " + std::to_string(axis));
    }
    for (std::size_t gidx = 0; gidx < groups; ++gidx) {
      std::size_t base = gidx * stride_between;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < len; ++i) mx = std::max(mx, va[base + i * stride_in_group]);
      T denom = T(0);
      for (std::size_t i = 0; i < len; ++i) {
        T e = std::exp(va[base + i * stride_in_group] - mx);
        out[base + i * stride_in_group] = e;
        denom += e;
      }
      for (std::size_t i = 0; i < len; ++i) out[base + i * stride_in_group] /= denom;
    }
    Var o = make(sa, std::move(out));
    record([this, a, o, groups, len, stride_in_group, stride_between] {
      const auto& g = grad_of(o);
      const auto& y = value(o);
      auto& ga = grad_of(a);
      for (std::size_t gidx = 0; gidx < groups; ++gidx) {
        std::size_t base = gidx * stride_between;
        T dot = T(0);
        for (std::size_t i = 0; i < len; ++i) {
          std::size_t ix = base + i * stride_in_group;
          dot += g[ix] * y[ix];
        }
        for (std::size_t i = 0; i < len; ++i) {
          std::size_t ix = base + i * stride_in_group;
          ga[ix] += y[ix] * (g[ix] - dot);
        }
      }
    });
    return o;
  }

  // Contiguous slice of the flattened buffer.
  Var slice(Var a, std::size_t offset, std::vector<std::size_t> out_shape) {
    std::size_t n = Tensor<T>::count(out_shape);
    const auto& va = value(a);
    if (offset + n > va.size())
      throw std::invalid_argument("slice out of range: offset " + std::to_string(offset) +
                                  " + " + shape_str(out_shape) + " exceeds " +
                                  shape_str(shape(a)));
    std::vector<T> out(va.begin() + static_cast<std::ptrdiff_t>(offset),
                       va.begin() + static_cast<std::ptrdiff_t>(offset + n));
    Var o = make(std::move(out_shape), std::move(out));
    record([this, a, o, offset, n] {
      const auto& g = grad_of(o);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < n; ++i) ga[offset + i] += g[i];
    });
    return o;
  }

  // Row r of a 2-D tensor, as a 1-D vector.
  Var row(Var a, std::size_t r) {
    const auto& sa = shape(a);
    if (sa.size() != 2) throw std::invalid_argument("row: need 2-D, got " + shape_str(sa));
    return slice(a, r * sa[1], {sa[1]});
  }

  Var reshape(Var a, std::vector<std::size_t> new_shape) {
    if (Tensor<T>::count(new_shape) != value(a).size())
      throw std::invalid_argument("reshape " + shape_str(shape(a)) + " -> " +
                                  shape_str(new_shape) + ": size mismatch");
    Var o = make(std::move(new_shape), value(a));
    record([this, a, o] {
      const auto& g = grad_of(o);
      auto& ga = grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
    return o;
  }

  // Concatenate along axis. 1-D tensors join end to end; 2-D tensors stack
  // rows (axis 0) or columns (axis 1).
  Var concat(const std::vector<Var>& parts, int axis = 0) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const auto& s0 = shape(parts[0]);
    if (s0.size() == 1 || axis == 0) {
      std::size_t total = 0;
      std::size_t inner = s0.size() == 2 ? s0[1] : 0;
      for (Var p : parts) {
        const auto& sp = shape(p);
        if (sp.size() != s0.size() || (s0.size() == 2 && sp[1] != inner))
          mismatch("concat", s0, sp);
        total += sp[0];
      }
      std::vector<T> out;
      out.reserve(Tensor<T>::count(s0) * parts.size());
      for (Var p : parts) {
        const auto& vp = value(p);
        out.insert(out.end(), vp.begin(), vp.end());
      }
      std::vector<std::size_t> osh = s0.size() == 2
                                         ? std::vector<std::size_t>{total, inner}
                                         : std::vector<std::size_t>{total};
      Var o = make(std::move(osh), std::move(out));
      std::vector<Var> ps = parts;
      record([this, ps, o] {
        const auto& g = grad_of(o);
        std::size_t off = 0;
        for (Var p : ps) {
          auto& gp = grad_of(p);
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
          off += gp.size();
        }
      });
      return o;
    }
    // axis 1: columns side by side
    std::size_t rows = s0[0], total_cols = 0;
    for (Var p : parts) {
      const auto& sp = shape(p);
      if (sp.size() != 2 || sp[0] != rows) mismatch("concat", s0, sp);
      total_cols += sp[1];
    }
    std::vector<T> out(rows * total_cols);
    std::size_t col_off = 0;
    for (Var p : parts) {
      const auto& vp = value(p);
      std::size_t c = shape(p)[1];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < c; ++j) out[r * total_cols + col_off + j] = vp[r * c + j];
      col_off += c;
    }
    Var o = make({rows, total_cols}, std::move(out));
    std::vector<Var> ps = parts;
    record([this, ps, o, rows, total_cols] {
      const auto& g = grad_of(o);
      std::size_t coff = 0;
      for (Var p : ps) {
        std::size_t c = shape(p)[1];
        auto& gp = grad_of(p);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < c; ++j) gp[r * c + j] += g[r * total_cols + coff + j];
        coff += c;
      }
    });
    return o;
  }

  // Rows of 1-D vectors stacked into a (T, n) matrix.
  Var stack_rows(const std::vector<Var>& rows_in) {
    std::vector<Var> reshaped;
    reshaped.reserve(rows_in.size());
    for (Var r : rows_in) {
      const auto& sr = shape(r);
      if (sr.size() != 1) throw std::invalid_argument("stack_rows: need 1-D rows");
      reshaped.push_back(reshape(r, {1, sr[0]}));
    }
    return concat(reshaped, 0);
  }

  Var sum(Var a) {
    const auto& va = value(a);
    T s = T(0);
    for (T v : va) s += v;
    Var o = make({1}, {s});
    record([this, a, o] {
      T g = grad_of(o)[0];
      auto& ga = grad_of(a);
      for (auto& v : ga) v += g;
    });
    return o;
  }

  Var mean(Var a) {
    std::size_t n = value(a).size();
    if (n == 0) throw std::invalid_argument("mean of empty tensor");
    Var o = sum(a);
    return scale(o, T(1) / static_cast<T>(n));
  }

  // Gather rows of an embedding matrix; backward scatters into the matrix's
  // grad directly (skipped entirely when the matrix is frozen).
  Var embed(Tensor<T>& table, const std::vector<int>& ids) {
    if (table.shape.size() != 2)
      throw std::invalid_argument("embed: table must be 2-D, got " + shape_str(table.shape));
    std::size_t v = table.shape[0], d = table.shape[1];
    std::vector<T> out(ids.size() * d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t r = static_cast<std::size_t>(ids[i]);
      if (r >= v)
        throw std::invalid_argument("embed: index " + std::to_string(ids[i]) +
                                    " out of range for " + shape_str(table.shape));
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] = table.data[r * d + j];
    }
    Var o = make({ids.size(), d}, std::move(out));
    if (table.requires_grad) {
      Tensor<T>* tp = &table;
      std::vector<int> ids_copy = ids;
      record([this, o, tp, ids_copy, d] {
        const auto& g = grad_of(o);
        if (tp->grad.size() != tp->data.size()) tp->grad.assign(tp->data.size(), T(0));
        for (std::size_t i = 0; i < ids_copy.size(); ++i) {
          std::size_t r = static_cast<std::size_t>(ids_copy[i]);
          for (std::size_t j = 0; j < d; ++j) tp->grad[r * d + j] += g[i * d + j];
        }
      });
    }
    return o;
  }

  // ---- backward --------------------------------------------------------

  // Seeds d(loss)/d(loss)=1, replays the tape in reverse, adds into each
  // requires_grad leaf's .grad, then clears the tape.
  void backward(Var loss) {
    if (value(loss).size() != 1)
      throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                  shape_str(shape(loss)));
    for (auto& n : nodes_) n.grad.assign(n.leaf ? n.leaf->data.size() : n.val.size(), T(0));
    nodes_[loss.id].grad[0] = T(1);
    for (auto it = backs_.rbegin(); it != backs_.rend(); ++it) (*it)();
    for (auto& n : nodes_) {
      if (n.leaf && n.leaf->requires_grad) {
        if (n.leaf->grad.size() != n.leaf->data.size())
          n.leaf->grad.assign(n.leaf->data.size(), T(0));
        for (std::size_t i = 0; i < n.grad.size(); ++i) n.leaf->grad[i] += n.grad[i];
      }
    }
    clear();
  }

  void clear() {
    nodes_.clear();
    backs_.clear();
  }

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::size_t> shape;
    std::vector<T> val;
    std::vector<T> grad;
    Tensor<T>* leaf = nullptr;
  };

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> backs_;

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  Var make(std::vector<std::size_t> shape, std::vector<T> val) {
    Node n;
    n.shape = std::move(shape);
    n.val = std::move(val);
    return push(std::move(n));
  }

  void record(std::function<void()> f) { backs_.push_back(std::move(f)); }

  std::vector<T>& grad_of(Var v) { return nodes_[v.id].grad; }

  [[noreturn]] static void mismatch(const char* op, const std::vector<std::size_t>& a,
                                    const std::vector<std::size_t>& b) {
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                                " and " + shape_str(b));
  }

  template <typename FwdF, typename BwdF>
  Var binary(Var a, Var b, const char* name, FwdF fwd, BwdF bwd) {
    const auto& va = value(a);
    const auto& vb = value(b);
    bool bcast = vb.size() == 1 && va.size() != 1;
    if (!bcast && va.size() != vb.size()) mismatch(name, shape(a), shape(b));
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = fwd(va[i], bcast ? vb[0] : vb[i]);
    Var o = make(shape(a), std::move(out));
    record([this, a, b, o, bcast, bwd] {
      const auto& g = grad_of(o);
      const auto& va2 = value(a);
      const auto& vb2 = value(b);
      auto& ga = grad_of(a);
      auto& gb = grad_of(b);
      for (std::size_t i = 0; i < g.size(); ++i) {
        auto [da, db] = bwd(va2[i], bcast ? vb2[0] : vb2[i], g[i]);
        ga[i] += da;
        if (bcast) gb[0] += db;
        else gb[i] += db;
      }
    });
    return o;
  }
};

// Central-difference gradient check. `f` must deterministically evaluate the
// scalar objective AND record analytic gradients into each param's .grad
// (build a tape, forward, backward). Returns the max over checked
// coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// With max_coords_per_tensor > 0 a random subset of coordinates is checked.
template <typename T, typename F>
T grad_check(F&& f, const std::vector<Tensor<T>*>& params, T eps,
             std::size_t max_coords_per_tensor = 0, Pcg32* rng = nullptr) {
  for (auto* p : params) p->zero_grad();
  f();
  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  T max_rel = T(0);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<T>& p = *params[pi];
    std::vector<std::size_t> coords;
    if (max_coords_per_tensor > 0 && p.size() > max_coords_per_tensor && rng) {
      for (std::size_t c = 0; c < max_coords_per_tensor; ++c)
        coords.push_back(rng->bounded(static_cast<std::uint32_t>(p.size())));
    } else {
      coords.resize(p.size());
      for (std::size_t c = 0; c < p.size(); ++c) coords[c] = c;
    }
    for (std::size_t c : coords) {
      T orig = p.data[c];
      p.data[c] = orig + eps;
      T lp = f();
      p.data[c] = orig - eps;
      T lm = f();
      p.data[c] = orig;
      T numeric = (lp - lm) / (T(2) * eps);
      T a = analytic[pi][c];
      T denom = std::max({std::abs(a), std::abs(numeric), T(1e-8)});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  for (auto* p : params) p->zero_grad();
  return max_rel;
}

}  // namespace irony
