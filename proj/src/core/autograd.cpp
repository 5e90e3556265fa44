//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/core/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scm/core/error.hpp"
#include "scm/core/kernels.hpp"

namespace scm::ag {
namespace {

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(Errc::ShapeMismatch, std::string(op) + " between " + shape_string(a.shape()) +
                                       " and " + shape_string(b.shape()));
}

void same_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw Error(Errc::ShapeMismatch, "operands live on different tapes");
}

/// Gradient buffer of an input, or nullptr when it does not need one.
double* grad_if(Tape& tape, std::size_t id) {
  return tape.needs_grad(id) ? tape.grad(id).data() : nullptr;
}

enum class Broadcast { Same, Row, Col, Scalar };

Broadcast broadcast_mode(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::Col;
  shape_mismatch(op, a, b);
}

inline std::size_t bindex(Broadcast mode, std::size_t r, std::size_t c, std::size_t cols) {
  switch (mode) {
    case Broadcast::Same: return r * cols + c;
    case Broadcast::Row: return c;
    case Broadcast::Col: return r;
    case Broadcast::Scalar: return 0;
  }
  return 0;
}

Tensor matrix_like(std::size_t rows, std::size_t cols) { return Tensor::matrix(rows, cols); }

/// Elementwise binary op with partials da = df/da, db = df/db evaluated on
/// (x, y, out).
template <class F, class DA, class DB>
Var binary(const char* name, Var a, Var b, F f, DA da, DB db) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const Broadcast mode = broadcast_mode(name, A, B);
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, C);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      out[r * C + c] = f(A[r * C + c], B[bindex(mode, r, c, C)]);
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& X = t.value(ia);
    const Tensor& Y = t.value(ib);
    const Tensor& O = t.value(self);
    const std::vector<double>& g = t.grad(self);
    double* gx = grad_if(t, ia);
    double* gy = grad_if(t, ib);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t i = r * C + c;
        const std::size_t j = bindex(mode, r, c, C);
        if (gx) gx[i] += g[i] * da(X[i], Y[j], O[i]);
        if (gy) gy[j] += g[i] * db(X[i], Y[j], O[i]);
      }
    }
  });
}

template <class F, class D>
Var unary(Var a, F f, D d) {
  const Tensor& A = a.value();
  Tensor out = matrix_like(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = f(A[i]);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* gx = grad_if(t, ia);
    if (!gx) return;
    const Tensor& X = t.value(ia);
    const Tensor& O = t.value(self);
    const std::vector<double>& g = t.grad(self);
    for (std::size_t i = 0; i < X.size(); ++i) gx[i] += g[i] * d(X[i], O[i]);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  Node node;
  if (value.shape().size() != 2) value = value.reshaped({value.rows(), value.cols()});
  node.own = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  if (p.value.shape().size() == 2) {
    node.external = &p.value;
  } else {
    node.own = p.value.reshaped({p.value.rows(), p.value.cols()});
  }
  node.param = &p;
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  Node node;
  node.own = std::move(value);
  node.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                [this](std::size_t i) { return nodes_[i].needs_grad; });
  node.inputs = std::move(inputs);
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.own;
}

std::vector<double>& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(value(id).size(), 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw Error(Errc::NonScalarLoss, "loss is not on this tape");
  if (value(loss.id()).size() != 1) {
    throw Error(Errc::NonScalarLoss, "loss has shape " + shape_string(value(loss.id()).shape()));
  }
  for (Node& n : nodes_) n.grad.clear();
  grad(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, i);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (!n.param) continue;
    std::vector<double>& slot = n.param->value.grad();
    for (std::size_t k = 0; k < n.grad.size(); ++k) slot[k] += n.grad[k];
  }
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(Var a, Var b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var gelu(Var a) {
  constexpr double k = 0.7978845608028654;  // sqrt(2 / pi)
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x))); },
      [](double x, double) {
        const double u = k * (x + 0.044715 * x * x * x);
        const double th = std::tanh(u);
        const double du = k * (1.0 + 3.0 * 0.044715 * x * x);
        return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
      });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var square(Var a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sqrt(Var a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

// ---------------------------------------------------------------------------
// Linear algebra and layout

Var matmul(Var a, Var b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows()) shape_mismatch("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out = matrix_like(m, n);
  kernels::gemm(A.data(), B.data(), out.data(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {ia, ib}, [=](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad(self);
    if (double* ga = grad_if(t, ia)) kernels::gemm_nt(g.data(), t.value(ib).data(), ga, m, n, k);
    if (double* gb = grad_if(t, ib)) kernels::gemm_tn(t.value(ia).data(), g.data(), gb, m, k, n);
  });
}

Var transpose(Var a) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(C, R);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) out[c * R + r] = A[r * C + c];
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) ga[r * C + c] += g[c * R + r];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::ShapeMismatch, "concat of zero tensors");
  const std::size_t R = parts[0].rows();
  std::size_t C = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (p.rows() != R) shape_mismatch("concat_cols", parts[0].value(), p.value());
    ids.push_back(p.id());
    widths.push_back(p.cols());
    C += p.cols();
  }
  Tensor out = matrix_like(R, C);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    for (std::size_t r = 0; r < R; ++r)
      std::copy_n(P.data() + r * P.cols(), P.cols(), out.data() + r * C + off);
    off += P.cols();
  }
  return parts[0].tape().record(std::move(out), ids, [=](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad(self);
    std::size_t o = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (double* gp = grad_if(t, ids[k])) {
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t c = 0; c < widths[k]; ++c) gp[r * widths[k] + c] += g[r * C + o + c];
      }
      o += widths[k];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::ShapeMismatch, "concat of zero tensors");
  const std::size_t C = parts[0].cols();
  std::size_t R = 0;
  std::vector<std::size_t> ids, sizes;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (p.cols() != C) shape_mismatch("concat_rows", parts[0].value(), p.value());
    ids.push_back(p.id());
    sizes.push_back(p.value().size());
    R += p.rows();
  }
  Tensor out = matrix_like(R, C);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& P = p.value();
    std::copy(P.values().begin(), P.values().end(), out.data() + off);
    off += P.size();
  }
  return parts[0].tape().record(std::move(out), ids, [=](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.grad(self);
    std::size_t o = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (double* gp = grad_if(t, ids[k])) {
        for (std::size_t i = 0; i < sizes[k]; ++i) gp[i] += g[o + i];
      }
      o += sizes[k];
    }
  });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  const Tensor& A = a.value();
  if (count == 0 || start + count > A.cols()) {
    throw Error(Errc::ShapeMismatch, "column slice [" + std::to_string(start) + ", " +
                                         std::to_string(start + count) + ") of " +
                                         shape_string(A.shape()));
  }
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, count);
  for (std::size_t r = 0; r < R; ++r)
    std::copy_n(A.data() + r * C + start, count, out.data() + r * count);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < count; ++c) ga[r * C + start + c] += g[r * count + c];
  });
}

Var slice_rows(Var a, std::size_t start, std::size_t count) {
  const Tensor& A = a.value();
  if (count == 0 || start + count > A.rows()) {
    throw Error(Errc::ShapeMismatch, "row slice [" + std::to_string(start) + ", " +
                                         std::to_string(start + count) + ") of " +
                                         shape_string(A.shape()));
  }
  const std::size_t C = A.cols();
  Tensor out = matrix_like(count, C);
  std::copy_n(A.data() + start * C, count * C, out.data());
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t i = 0; i < count * C; ++i) ga[start * C + i] += g[i];
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& A = a.value();
  if (rows.empty()) throw Error(Errc::ShapeMismatch, "gather of zero rows");
  const std::size_t C = A.cols();
  Tensor out = matrix_like(rows.size(), C);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= A.rows()) {
      throw Error(Errc::ShapeMismatch, "row " + std::to_string(rows[k]) + " outside " +
                                           shape_string(A.shape()));
    }
    std::copy_n(A.data() + rows[k] * C, C, out.data() + k * C);
  }
  const std::size_t ia = a.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t c = 0; c < C; ++c) ga[idx[k] * C + c] += g[k * C + c];
  });
}

// ---------------------------------------------------------------------------
// Row-wise reductions

Var row_norm(Var a) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, 1);
  for (std::size_t r = 0; r < R; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += A[r * C + c] * A[r * C + c];
    out[r] = std::sqrt(s);
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const Tensor& X = t.value(ia);
    const Tensor& N = t.value(self);
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r) {
      if (N[r] == 0.0) continue;
      for (std::size_t c = 0; c < C; ++c) ga[r * C + c] += g[r] * X[r * C + c] / N[r];
    }
  });
}

Var normalize_rows(Var a, double eps) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, C);
  std::vector<double> norms(R);
  for (std::size_t r = 0; r < R; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += A[r * C + c] * A[r * C + c];
    norms[r] = std::sqrt(s);
    const double d = std::max(norms[r], eps);
    for (std::size_t c = 0; c < C; ++c) out[r * C + c] = A[r * C + c] / d;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const Tensor& Y = t.value(self);
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r) {
      if (norms[r] < eps) {
        for (std::size_t c = 0; c < C; ++c) ga[r * C + c] += g[r * C + c] / eps;
        continue;
      }
      double dot = 0.0;
      for (std::size_t c = 0; c < C; ++c) dot += Y[r * C + c] * g[r * C + c];
      for (std::size_t c = 0; c < C; ++c)
        ga[r * C + c] += (g[r * C + c] - Y[r * C + c] * dot) / norms[r];
    }
  });
}

Var softmax(Var a, bool causal) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, C);
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t end = causal ? std::min(C, r + 1) : C;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < end; ++c) mx = std::max(mx, A[r * C + c]);
    double s = 0.0;
    for (std::size_t c = 0; c < end; ++c) {
      out[r * C + c] = std::exp(A[r * C + c] - mx);
      s += out[r * C + c];
    }
    for (std::size_t c = 0; c < end; ++c) out[r * C + c] /= s;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const Tensor& Y = t.value(self);
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r) {
      const std::size_t end = causal ? std::min(C, r + 1) : C;
      double dot = 0.0;
      for (std::size_t c = 0; c < end; ++c) dot += g[r * C + c] * Y[r * C + c];
      for (std::size_t c = 0; c < end; ++c) ga[r * C + c] += Y[r * C + c] * (g[r * C + c] - dot);
    }
  });
}

Var log_softmax(Var a) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, C);
  for (std::size_t r = 0; r < R; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, A[r * C + c]);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += std::exp(A[r * C + c] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t c = 0; c < C; ++c) out[r * C + c] = A[r * C + c] - lse;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const Tensor& Y = t.value(self);
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r) {
      double gs = 0.0;
      for (std::size_t c = 0; c < C; ++c) gs += g[r * C + c];
      for (std::size_t c = 0; c < C; ++c)
        ga[r * C + c] += g[r * C + c] - std::exp(Y[r * C + c]) * gs;
    }
  });
}

Var layer_norm(Var a, double eps) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(R, C);
  std::vector<double> inv_std(R);
  for (std::size_t r = 0; r < R; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < C; ++c) mu += A[r * C + c];
    mu /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) var += (A[r * C + c] - mu) * (A[r * C + c] - mu);
    var /= static_cast<double>(C);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < C; ++c) out[r * C + c] = (A[r * C + c] - mu) * inv_std[r];
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const Tensor& Y = t.value(self);
    const std::vector<double>& g = t.grad(self);
    const double n = static_cast<double>(C);
    for (std::size_t r = 0; r < R; ++r) {
      double mg = 0.0, mgy = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        mg += g[r * C + c];
        mgy += g[r * C + c] * Y[r * C + c];
      }
      mg /= n;
      mgy /= n;
      for (std::size_t c = 0; c < C; ++c)
        ga[r * C + c] += inv_std[r] * (g[r * C + c] - mg - Y[r * C + c] * mgy);
    }
  });
}

Var embedding(Var table, std::span<const int> ids) {
  const Tensor& T = table.value();
  const std::size_t V = T.rows(), C = T.cols();
  if (ids.empty()) throw Error(Errc::ShapeMismatch, "embedding lookup of zero ids");
  Tensor out = matrix_like(ids.size(), C);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0 || static_cast<std::size_t>(ids[k]) >= V) {
      throw Error(Errc::VocabOverflow, "id " + std::to_string(ids[k]) + " outside table of " +
                                           std::to_string(V) + " rows");
    }
    std::copy_n(T.data() + static_cast<std::size_t>(ids[k]) * C, C, out.data() + k * C);
  }
  const std::size_t it = table.id();
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape().record(std::move(out), {it}, [=](Tape& t, std::size_t self) {
    double* gt = grad_if(t, it);
    if (!gt) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t k = 0; k < idx.size(); ++k)
      for (std::size_t c = 0; c < C; ++c)
        gt[static_cast<std::size_t>(idx[k]) * C + c] += g[k * C + c];
  });
}

// ---------------------------------------------------------------------------
// Losses and reductions

Var cross_entropy(Var logits, std::span<const int> targets, int ignore) {
  const Tensor& L = logits.value();
  const std::size_t R = L.rows(), C = L.cols();
  if (targets.size() != R) {
    throw Error(Errc::ShapeMismatch, std::to_string(targets.size()) + " targets for logits " +
                                         shape_string(L.shape()));
  }
  std::vector<double> probs(R * C, 0.0);
  std::vector<int> tg(targets.begin(), targets.end());
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (tg[r] == ignore) continue;
    if (tg[r] < 0 || static_cast<std::size_t>(tg[r]) >= C) {
      throw Error(Errc::VocabOverflow, "target " + std::to_string(tg[r]) + " outside " +
                                           std::to_string(C) + " classes");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, L[r * C + c]);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) s += std::exp(L[r * C + c] - mx);
    for (std::size_t c = 0; c < C; ++c) probs[r * C + c] = std::exp(L[r * C + c] - mx) / s;
    total += -(L[r * C + static_cast<std::size_t>(tg[r])] - mx - std::log(s));
    ++count;
  }
  const double denom = count == 0 ? 1.0 : static_cast<double>(count);
  const std::size_t il = logits.id();
  return logits.tape().record(
      Tensor::scalar(count == 0 ? 0.0 : total / denom), {il}, [=](Tape& t, std::size_t self) {
        double* gl = grad_if(t, il);
        if (!gl || count == 0) return;
        const double g = t.grad(self)[0] / denom;
        for (std::size_t r = 0; r < R; ++r) {
          if (tg[r] == ignore) continue;
          for (std::size_t c = 0; c < C; ++c) gl[r * C + c] += g * probs[r * C + c];
          gl[r * C + static_cast<std::size_t>(tg[r])] -= g;
        }
      });
}

Var mse(Var a, Var b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rows() != B.rows() || A.cols() != B.cols()) shape_mismatch("mse", A, B);
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += (A[i] - B[i]) * (A[i] - B[i]);
  const double n = static_cast<double>(A.size());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(Tensor::scalar(s / n), {ia, ib}, [=](Tape& t, std::size_t self) {
    const Tensor& X = t.value(ia);
    const Tensor& Y = t.value(ib);
    const double g = t.grad(self)[0] * 2.0 / n;
    double* gx = grad_if(t, ia);
    double* gy = grad_if(t, ib);
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (gx) gx[i] += g * (X[i] - Y[i]);
      if (gy) gy[i] -= g * (X[i] - Y[i]);
    }
  });
}

Var sum(Var a) {
  const Tensor& A = a.value();
  double s = 0.0;
  for (double v : A.values()) s += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor::scalar(s), {ia}, [ia](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const double g = t.grad(self)[0];
    const std::size_t n = t.value(ia).size();
    for (std::size_t i = 0; i < n; ++i) ga[i] += g;
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var mean_rows(Var a) {
  const Tensor& A = a.value();
  const std::size_t R = A.rows(), C = A.cols();
  Tensor out = matrix_like(1, C);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < C; ++c) out[c] += A[r * C + c];
  for (std::size_t c = 0; c < C; ++c) out[c] /= static_cast<double>(R);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {ia}, [=](Tape& t, std::size_t self) {
    double* ga = grad_if(t, ia);
    if (!ga) return;
    const std::vector<double>& g = t.grad(self);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) ga[r * C + c] += g[c] / static_cast<double>(R);
  });
}

Var add_n(std::span<const Var> parts) {
  if (parts.empty()) throw Error(Errc::ShapeMismatch, "sum of zero tensors");
  Var acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return acc;
}

}  // namespace scm::ag
