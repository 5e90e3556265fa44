//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <string>

#include "scm/core/autograd.hpp"
#include "scm/core/rng.hpp"
#include "scm/core/tensor.hpp"

// Shared layers for the transformer-style modules.
namespace scm::nn {

/// Sinusoidal position table: row r encodes position offset + r.
Tensor sinusoidal(std::size_t rows, std::size_t width, std::size_t offset = 0);
/// Single sinusoidal row for a (possibly non-integer) position.
Tensor sinusoidal_row(double position, std::size_t width);

Parameter normal_param(std::string name, Shape shape, Rng& rng, double stddev);
Parameter const_param(std::string name, Shape shape, double value);

/// y = x W + b with W stored (in, out).
struct Linear {
  Parameter weight;
  Parameter bias;
  bool use_bias = true;

  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         bool with_bias = true, double gain = 1.0);

  ag::Var operator()(ag::Tape& tape, ag::Var x) const;
  void collect(ParamRefs& out);
  std::size_t in() const { return weight.value.rows(); }
  std::size_t out() const { return weight.value.cols(); }
};

struct LayerNorm {
  Parameter gain;
  Parameter bias;

  LayerNorm() = default;
  LayerNorm(const std::string& name, std::size_t width);

  ag::Var operator()(ag::Tape& tape, ag::Var x) const;
  void collect(ParamRefs& out);
};

/// Pre-norm transformer block: x + Attn(LN(x)), then x + MLP(LN(x)).
struct TransformerBlock {
  LayerNorm ln_attn;
  LayerNorm ln_mlp;
  Linear qkv;
  Linear proj;
  Linear fc1;
  Linear fc2;
  std::size_t heads = 1;
  bool causal = false;

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, std::size_t width, std::size_t heads,
                   std::size_t mlp_width, bool causal, Rng& rng);

  ag::Var operator()(ag::Tape& tape, ag::Var x) const;
  void collect(ParamRefs& out);
};

}  // namespace scm::nn
