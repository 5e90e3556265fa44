//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "scm/core/tensor.hpp"

namespace scm::ag {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double item() const { return value()[0]; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Ordered record of operations. Nodes are appended in evaluation order, so
/// the node list is already a topological order and backward() is a single
/// reverse sweep that visits each node once.
///
/// A tape belongs to one execution context. Parameters enter through param();
/// backward() adds into their gradient slots, so calling it twice accumulates.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(const Parameter& p);
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  /// Gradient buffer of a node, zero-filled on first access.
  std::vector<double>& grad(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor own;
    const Tensor* external = nullptr;
    const Parameter* param = nullptr;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Elementwise binary ops broadcast b when it is 1x1, 1xC (row) or Rx1
// (column) against an RxC operand a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var slice_rows(Var a, std::size_t start, std::size_t count);
Var gather_rows(Var a, std::span<const std::size_t> rows);

Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
/// tanh approximation of GELU.
Var gelu(Var a);
Var exp(Var a);
Var square(Var a);
/// Square root with a zero subgradient at 0.
Var sqrt(Var a);

/// L2 norm of each row, giving an Rx1 column. Zero rows get zero gradient.
Var row_norm(Var a);
/// Rows scaled to unit length; rows with norm below eps are divided by eps.
Var normalize_rows(Var a, double eps = 1e-12);

/// Row-wise softmax. With causal set, entry (i, j) for j > i is excluded.
Var softmax(Var a, bool causal = false);
Var log_softmax(Var a);
/// Row-wise (x - mean) / sqrt(var + eps), no affine part.
Var layer_norm(Var a, double eps = 1e-5);

/// Rows of `table` selected by ids.
Var embedding(Var table, std::span<const int> ids);

/// Mean negative log-likelihood of targets under row-wise softmax(logits).
/// Targets equal to `ignore` are skipped. Returns exactly 0 when every
/// target is ignored.
Var cross_entropy(Var logits, std::span<const int> targets, int ignore = -1);
/// Mean squared error over all elements.
Var mse(Var a, Var b);

Var sum(Var a);
Var mean(Var a);
/// Column means over rows, giving a 1xC row.
Var mean_rows(Var a);
/// Sum of parts, all with equal shapes.
Var add_n(std::span<const Var> parts);

}  // namespace scm::ag
