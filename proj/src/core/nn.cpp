//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/core/nn.hpp"

#include <cmath>
#include <vector>

#include "scm/core/error.hpp"

namespace scm::nn {

using ag::Tape;
using ag::Var;

Tensor sinusoidal_row(double position, std::size_t width) {
  Tensor out = Tensor::matrix(1, width);
  for (std::size_t i = 0; i < width; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) /
                                              static_cast<double>(width));
    out[i] = (i % 2 == 0) ? std::sin(position * freq) : std::cos(position * freq);
  }
  return out;
}

Tensor sinusoidal(std::size_t rows, std::size_t width, std::size_t offset) {
  Tensor out = Tensor::matrix(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    Tensor row = sinusoidal_row(static_cast<double>(offset + r), width);
    std::copy(row.values().begin(), row.values().end(), out.data() + r * width);
  }
  return out;
}

Parameter normal_param(std::string name, Shape shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = stddev * rng.normal();
  return Parameter(std::move(name), std::move(t));
}

Parameter const_param(std::string name, Shape shape, double value) {
  return Parameter(std::move(name), Tensor(std::move(shape), value));
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng,
               bool with_bias, double gain)
    : weight(normal_param(name + ".weight", {in, out}, rng,
                          gain / std::sqrt(static_cast<double>(in)))),
      bias(const_param(name + ".bias", {1, out}, 0.0)),
      use_bias(with_bias) {}

Var Linear::operator()(Tape& tape, Var x) const {
  if (x.cols() != in()) {
    throw Error(Errc::ShapeMismatch, weight.name + " expects width " + std::to_string(in()) +
                                         ", got " + shape_string(x.value().shape()));
  }
  Var y = ag::matmul(x, tape.param(weight));
  return use_bias ? ag::add(y, tape.param(bias)) : y;
}

void Linear::collect(ParamRefs& out) {
  out.push_back(&weight);
  if (use_bias) out.push_back(&bias);
}

LayerNorm::LayerNorm(const std::string& name, std::size_t width)
    : gain(const_param(name + ".gain", {1, width}, 1.0)),
      bias(const_param(name + ".bias", {1, width}, 0.0)) {}

Var LayerNorm::operator()(Tape& tape, Var x) const {
  return ag::add(ag::mul(ag::layer_norm(x), tape.param(gain)), tape.param(bias));
}

void LayerNorm::collect(ParamRefs& out) {
  out.push_back(&gain);
  out.push_back(&bias);
}

TransformerBlock::TransformerBlock(const std::string& name, std::size_t width,
                                   std::size_t n_heads, std::size_t mlp_width, bool is_causal,
                                   Rng& rng)
    : ln_attn(name + ".ln_attn", width),
      ln_mlp(name + ".ln_mlp", width),
      qkv(name + ".qkv", width, 3 * width, rng),
      proj(name + ".proj", width, width, rng, true, 0.5),
      fc1(name + ".fc1", width, mlp_width, rng),
      fc2(name + ".fc2", mlp_width, width, rng, true, 0.5),
      heads(n_heads),
      causal(is_causal) {
  if (n_heads == 0 || width % n_heads != 0) {
    throw Error(Errc::ShapeMismatch, name + ": width " + std::to_string(width) +
                                         " not divisible into " + std::to_string(n_heads) +
                                         " heads");
  }
}

Var TransformerBlock::operator()(Tape& tape, Var x) const {
  const std::size_t width = x.cols();
  const std::size_t dh = width / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));

  Var h = ln_attn(tape, x);
  Var packed = qkv(tape, h);
  std::vector<Var> outs;
  outs.reserve(heads);
  for (std::size_t k = 0; k < heads; ++k) {
    Var q = ag::slice_cols(packed, k * dh, dh);
    Var kk = ag::slice_cols(packed, width + k * dh, dh);
    Var v = ag::slice_cols(packed, 2 * width + k * dh, dh);
    Var scores = ag::scale(ag::matmul(q, ag::transpose(kk)), inv);
    outs.push_back(ag::matmul(ag::softmax(scores, causal), v));
  }
  Var attn = heads == 1 ? outs[0] : ag::concat_cols(outs);
  x = ag::add(x, proj(tape, attn));

  Var m = fc2(tape, ag::gelu(fc1(tape, ln_mlp(tape, x))));
  return ag::add(x, m);
}

void TransformerBlock::collect(ParamRefs& out) {
  ln_attn.collect(out);
  qkv.collect(out);
  proj.collect(out);
  ln_mlp.collect(out);
  fc1.collect(out);
  fc2.collect(out);
}

}  // namespace scm::nn
