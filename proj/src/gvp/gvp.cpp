//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/gvp/gvp.hpp"

#include <cmath>

#include "scm/core/error.hpp"

namespace scm::gvp {

using ag::Tape;
using ag::Var;

GVPLayer::GVPLayer(const std::string& name, std::size_t s_in, std::size_t v_in, std::size_t s_out,
                   std::size_t v_out, Rng& rng, ScalarAct a, Gate g)
    : w_v(nn::normal_param(name + ".w_v", {v_in, v_out}, rng,
                           1.0 / std::sqrt(static_cast<double>(v_in)))),
      w_s(nn::normal_param(name + ".w_s", {s_in + v_out, s_out}, rng,
                           1.0 / std::sqrt(static_cast<double>(s_in + v_out)))),
      b_s(nn::const_param(name + ".b_s", {1, s_out}, 0.0)),
      w_g(nn::normal_param(name + ".w_g", {s_out, v_out}, rng,
                           1.0 / std::sqrt(static_cast<double>(s_out)))),
      b_g(nn::const_param(name + ".b_g", {1, v_out}, 0.0)),
      act(a),
      gate(g) {}

VarState GVPLayer::operator()(Tape& tape, const VarState& in) const {
  if (in.s.cols() != s_in() || in.v[0].cols() != v_in()) {
    throw Error(Errc::ShapeMismatch,
                w_v.name + ": expected widths (" + std::to_string(s_in()) + ", " +
                    std::to_string(v_in()) + "), got (" + std::to_string(in.s.cols()) + ", " +
                    std::to_string(in.v[0].cols()) + ")");
  }
  for (const Var& c : in.v) {
    if (c.rows() != in.s.rows() || c.cols() != v_in()) {
      throw Error(Errc::ShapeMismatch, w_v.name + ": vector channel shape " +
                                           shape_string(c.value().shape()));
    }
  }
  const Var wv = tape.param(w_v);
  std::array<Var, 3> vh;
  for (int c = 0; c < 3; ++c) vh[c] = ag::matmul(in.v[c], wv);
  Var sq = ag::add(ag::add(ag::square(vh[0]), ag::square(vh[1])), ag::square(vh[2]));
  Var norms = ag::sqrt(sq);
  const Var parts[] = {in.s, norms};
  Var pre = ag::add(ag::matmul(ag::concat_cols(parts), tape.param(w_s)), tape.param(b_s));
  VarState out;
  out.s = act == ScalarAct::Relu ? ag::relu(pre) : pre;
  if (gate == Gate::None) {
    out.v = vh;
  } else {
    Var g = ag::sigmoid(ag::add(ag::matmul(out.s, tape.param(w_g)), tape.param(b_g)));
    for (int c = 0; c < 3; ++c) out.v[c] = ag::mul(g, vh[c]);
  }
  return out;
}

void GVPLayer::collect(ParamRefs& out) {
  out.push_back(&w_v);
  out.push_back(&w_s);
  out.push_back(&b_s);
  if (gate != Gate::None) {
    out.push_back(&w_g);
    out.push_back(&b_g);
  }
}

GVPState gvp_layer(const GVPState& state, const GVPLayer& layer) {
  Tape tape;
  VarState in{tape.constant(state.s),
              {tape.constant(state.v[0]), tape.constant(state.v[1]), tape.constant(state.v[2])}};
  return layer(tape, in).value();
}

NodeInputs featurize(const chem::MolecularGraph& graph, const chem::Conformer& conformer) {
  const std::size_t n = graph.atoms.size();
  if (n == 0) throw Error(Errc::EmptyGraph, "molecule has no atoms");
  if (conformer.coords.size() != n) {
    throw Error(Errc::ConformerMismatch, "conformer has " + std::to_string(conformer.coords.size()) +
                                             " coordinates for " + std::to_string(n) + " atoms");
  }
  const std::vector<bool> in_ring = chem::ring_atoms(graph);
  const auto nbrs = graph.neighbors();
  NodeInputs out;
  out.state.s = Tensor::matrix(n, kNodeFeatures);
  for (Tensor& c : out.state.v) c = Tensor::matrix(n, 1);
  out.adjacency = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const chem::Atom& a = graph.atoms[i];
    out.state.s(i, static_cast<std::size_t>(a.element)) = 1.0;
    out.state.s(i, chem::kElementCount) = a.charge;
    out.state.s(i, chem::kElementCount + 1) = a.aromatic ? 1.0 : 0.0;
    out.state.s(i, chem::kElementCount + 2) = in_ring[i] ? 1.0 : 0.0;
    for (std::size_t j : nbrs[i]) {
      chem::Vec3 d;
      double len2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        d[c] = conformer.coords[j][c] - conformer.coords[i][c];
        len2 += d[c] * d[c];
      }
      const double len = std::sqrt(len2);
      if (len > 0.0) {
        for (int c = 0; c < 3; ++c) out.state.v[c](i, 0) += d[c] / len;
      }
      out.adjacency(i, j) = 1.0 / static_cast<double>(nbrs[i].size());
    }
  }
  return out;
}

GvpEncoder::GvpEncoder(const GvpConfig& config, Rng& rng) : config_(config) {
  std::size_t s_in = kNodeFeatures, v_in = 1;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const bool last = l + 1 == config.layers;
    layers_.emplace_back("gvp.layer" + std::to_string(l), 2 * s_in, 2 * v_in, config.scalar_width,
                         config.vector_width, rng, last ? ScalarAct::Identity : ScalarAct::Relu,
                         Gate::Sigmoid);
    s_in = config.scalar_width;
    v_in = config.vector_width;
  }
  adapter1_ = nn::Linear("gvp.adapter.fc1", config.scalar_width, config.adapter_hidden, rng);
  adapter2_ = nn::Linear("gvp.adapter.fc2", config.adapter_hidden, config.model_width, rng);
}

VarState GvpEncoder::message_pass(Tape& tape, const NodeInputs& inputs,
                                  std::vector<VarState>* trace) const {
  const Var adj = tape.constant(inputs.adjacency);
  VarState h{tape.constant(inputs.state.s),
             {tape.constant(inputs.state.v[0]), tape.constant(inputs.state.v[1]),
              tape.constant(inputs.state.v[2])}};
  for (const GVPLayer& layer : layers_) {
    VarState in;
    const Var sp[] = {h.s, ag::matmul(adj, h.s)};
    in.s = ag::concat_cols(sp);
    for (int c = 0; c < 3; ++c) {
      const Var vp[] = {h.v[c], ag::matmul(adj, h.v[c])};
      in.v[c] = ag::concat_cols(vp);
    }
    h = layer(tape, in);
    if (trace) trace->push_back(h);
  }
  return h;
}

Var GvpEncoder::pool(Var scalars) {
  if (scalars.rows() == 0) throw Error(Errc::EmptyGraph, "cannot pool zero nodes");
  return ag::mean_rows(scalars);
}

Var GvpEncoder::adapt(Tape& tape, Var h_geo) const {
  if (h_geo.cols() != adapter1_.in()) {
    throw Error(Errc::ShapeMismatch, "adapter expects width " + std::to_string(adapter1_.in()) +
                                         ", got " + shape_string(h_geo.value().shape()));
  }
  return adapter2_(tape, ag::relu(adapter1_(tape, h_geo)));
}

Var GvpEncoder::h_geo(Tape& tape, const chem::MolecularGraph& graph,
                      const chem::Conformer& conformer) const {
  return pool(message_pass(tape, featurize(graph, conformer)).s);
}

Var GvpEncoder::h_mol(Tape& tape, const chem::MolecularGraph& graph,
                      const chem::Conformer& conformer) const {
  return adapt(tape, h_geo(tape, graph, conformer));
}

Tensor GvpEncoder::embed_geo(const chem::MolecularGraph& graph, std::uint64_t seed) const {
  Tape tape;
  return h_geo(tape, graph, chem::assign_conformer(graph, seed)).value();
}

Tensor GvpEncoder::embed_mol(const chem::MolecularGraph& graph, std::uint64_t seed) const {
  Tape tape;
  return h_mol(tape, graph, chem::assign_conformer(graph, seed)).value();
}

void GvpEncoder::collect(ParamRefs& out) {
  for (GVPLayer& l : layers_) l.collect(out);
  adapter1_.collect(out);
  adapter2_.collect(out);
}

}  // namespace scm::gvp
