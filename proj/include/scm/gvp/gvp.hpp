//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scm/chem/conformer.hpp"
#include "scm/chem/molecule.hpp"
#include "scm/core/autograd.hpp"
#include "scm/core/nn.hpp"
#include "scm/core/rng.hpp"

namespace scm::gvp {

/// Scalar channels s (N x n_s) and vector channels stored per Cartesian
/// coordinate: v[c] is N x nu and holds coordinate c of every channel.
struct GVPState {
  Tensor s;
  std::array<Tensor, 3> v;

  std::size_t nodes() const { return s.rows(); }
  chem::Vec3 vector(std::size_t node, std::size_t channel) const {
    return {v[0](node, channel), v[1](node, channel), v[2](node, channel)};
  }
};

/// Same layout on a tape.
struct VarState {
  ag::Var s;
  std::array<ag::Var, 3> v;

  GVPState value() const { return {s.value(), {v[0].value(), v[1].value(), v[2].value()}}; }
};

enum class ScalarAct { Relu, Identity };
enum class Gate { Sigmoid, None };

/// V_h = V W_V;  s' = act(W_s [s || |V_h|] + b_s);  V' = gate(s' W_g + b_g) * V_h.
/// Gate::None fixes the gate at 1. Vector channels never receive a bias.
struct GVPLayer {
  Parameter w_v;  // (nu_in, nu_out)
  Parameter w_s;  // (n_s_in + nu_out, n_s_out)
  Parameter b_s;  // (1, n_s_out)
  Parameter w_g;  // (n_s_out, nu_out)
  Parameter b_g;  // (1, nu_out)
  ScalarAct act = ScalarAct::Relu;
  Gate gate = Gate::Sigmoid;

  GVPLayer() = default;
  GVPLayer(const std::string& name, std::size_t s_in, std::size_t v_in, std::size_t s_out,
           std::size_t v_out, Rng& rng, ScalarAct act = ScalarAct::Relu, Gate gate = Gate::Sigmoid);

  std::size_t s_in() const { return w_s.value.rows() - v_out(); }
  std::size_t v_in() const { return w_v.value.rows(); }
  std::size_t s_out() const { return w_s.value.cols(); }
  std::size_t v_out() const { return w_v.value.cols(); }

  VarState operator()(ag::Tape& tape, const VarState& in) const;
  void collect(ParamRefs& out);
};

GVPState gvp_layer(const GVPState& state, const GVPLayer& layer);

struct GvpConfig {
  std::size_t scalar_width = 32;
  std::size_t vector_width = 4;
  std::size_t layers = 4;
  std::size_t adapter_hidden = 128;
  std::size_t model_width = 64;
};

/// Element one-hot (10), formal charge, aromatic flag, ring membership.
inline constexpr std::size_t kNodeFeatures = chem::kElementCount + 3;

/// Per-node inputs derived from a graph and its conformer.
struct NodeInputs {
  GVPState state;      // n_s = kNodeFeatures, nu = 1
  Tensor adjacency;    // N x N, rows average over bonded neighbours
};

NodeInputs featurize(const chem::MolecularGraph& graph, const chem::Conformer& conformer);

class GvpEncoder {
 public:
  GvpEncoder() = default;
  GvpEncoder(const GvpConfig& config, Rng& rng);

  const GvpConfig& config() const noexcept { return config_; }

  /// Runs the layer stack. When `trace` is given, it receives the state
  /// after every layer.
  VarState message_pass(ag::Tape& tape, const NodeInputs& inputs,
                        std::vector<VarState>* trace = nullptr) const;
  /// Mean over node scalars (1 x n_s).
  static ag::Var pool(ag::Var scalars);
  /// W2 relu(W1 h + b1) + b2.
  ag::Var adapt(ag::Tape& tape, ag::Var h_geo) const;

  ag::Var h_geo(ag::Tape& tape, const chem::MolecularGraph& graph,
                const chem::Conformer& conformer) const;
  ag::Var h_mol(ag::Tape& tape, const chem::MolecularGraph& graph,
                const chem::Conformer& conformer) const;

  /// Inference helpers using the default conformer seed.
  Tensor embed_geo(const chem::MolecularGraph& graph, std::uint64_t seed = 0) const;
  Tensor embed_mol(const chem::MolecularGraph& graph, std::uint64_t seed = 0) const;

  void collect(ParamRefs& out);
  std::vector<GVPLayer>& layers() noexcept { return layers_; }
  nn::Linear& adapter_in() noexcept { return adapter1_; }
  nn::Linear& adapter_out() noexcept { return adapter2_; }

 private:
  GvpConfig config_;
  std::vector<GVPLayer> layers_;
  nn::Linear adapter1_;
  nn::Linear adapter2_;
};

}  // namespace scm::gvp
