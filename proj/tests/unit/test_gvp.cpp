//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"
#include "scm/core/gradcheck.hpp"
#include "scm/gvp/gvp.hpp"
#include "support/geometry.hpp"
#include "support/oracles.hpp"

using namespace scm;
using namespace scm::gvp;

namespace {

GVPState random_state(std::size_t n, std::size_t ns, std::size_t nv, Rng& rng) {
  GVPState st;
  st.s = Tensor::matrix(n, ns);
  for (double& x : st.s.values()) x = rng.uniform(-1, 1);
  for (Tensor& c : st.v) {
    c = Tensor::matrix(n, nv);
    for (double& x : c.values()) x = rng.uniform(-1, 1);
  }
  return st;
}

GVPState rotate(const GVPState& st, const oracle::Mat3& r) {
  GVPState out = st;
  for (std::size_t i = 0; i < st.nodes(); ++i) {
    for (std::size_t k = 0; k < st.v[0].cols(); ++k) {
      const chem::Vec3 p = oracle::rotate_point(r, st.vector(i, k));
      for (int c = 0; c < 3; ++c) out.v[c](i, k) = p[c];
    }
  }
  return out;
}

double max_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(GvpLayer, HandExample) {
  Rng rng(0);
  GVPLayer layer("t", 1, 1, 1, 1, rng, ScalarAct::Identity, Gate::None);
  layer.w_v.value = Tensor::matrix(1, 1, {1.0});
  layer.w_s.value = Tensor::matrix(2, 1, {1.0, 1.0});
  layer.b_s.value = Tensor::matrix(1, 1, {0.0});
  GVPState st;
  st.s = Tensor::matrix(1, 1, {2.0});
  st.v = {Tensor::matrix(1, 1, {3.0}), Tensor::matrix(1, 1, {4.0}), Tensor::matrix(1, 1, {0.0})};
  const GVPState out = gvp_layer(st, layer);
  EXPECT_EQ(out.s[0], 7.0);
  EXPECT_EQ(out.vector(0, 0), (chem::Vec3{3.0, 4.0, 0.0}));
}

TEST(GvpLayer, ZeroVectors) {
  Rng rng(1);
  GVPLayer layer("t", 3, 2, 4, 3, rng);
  GVPState st = random_state(2, 3, 2, rng);
  for (Tensor& c : st.v) c = Tensor::matrix(2, 2);
  const GVPState out = gvp_layer(st, layer);
  // s' = relu([s || 0] W_s + b_s)
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t o = 0; o < 4; ++o) {
      double pre = layer.b_s.value[o];
      for (std::size_t k = 0; k < 3; ++k) pre += st.s(i, k) * layer.w_s.value(k, o);
      EXPECT_NEAR(out.s(i, o), std::max(0.0, pre), 1e-15);
    }
  }
  for (const Tensor& c : out.v)
    for (double x : c.values()) EXPECT_EQ(x, 0.0);
}

TEST(GvpLayer, ShapeMismatch) {
  Rng rng(2);
  GVPLayer layer("t", 3, 2, 4, 3, rng);
  try {
    gvp_layer(random_state(2, 4, 2, rng), layer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
}

TEST(GvpLayer, RotationEquivariant) {
  Rng rng(3);
  GVPLayer layer("t", 5, 3, 6, 4, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const GVPState st = random_state(4, 5, 3, rng);
    const oracle::Mat3 r = oracle::random_rotation(rng);
    const GVPState a = gvp_layer(rotate(st, r), layer);
    const GVPState b = rotate(gvp_layer(st, layer), r);
    EXPECT_LT(max_diff(a.s, b.s), 1e-12);
    for (int c = 0; c < 3; ++c) EXPECT_LT(max_diff(a.v[c], b.v[c]), 1e-12);
  }
}

TEST(GvpLayer, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  GVPLayer layer("t", 5, 3, 6, 4, rng);
  ParamRefs ps;
  layer.collect(ps);
  const GVPState st = random_state(3, 5, 3, rng);
  auto f = [&](ag::Tape& t) {
    VarState in{t.constant(st.s), {t.constant(st.v[0]), t.constant(st.v[1]), t.constant(st.v[2])}};
    VarState out = layer(t, in);
    ag::Var l = ag::sum(ag::square(out.s));
    for (const ag::Var& c : out.v) l = ag::add(l, ag::sum(ag::mul(c, c)));
    return l;
  };
  EXPECT_LT(ag::finite_diff_check(f, ps).max_rel_error, 1e-4);
}

TEST(MessagePass, SingleAtomVectorsStayZero) {
  Rng rng(5);
  GvpEncoder enc(GvpConfig{}, rng);
  const chem::MolecularGraph g = chem::parse_smiles("C");
  ag::Tape tape;
  std::vector<VarState> trace;
  enc.message_pass(tape, featurize(g, chem::assign_conformer(g, 0)), &trace);
  ASSERT_EQ(trace.size(), 4u);
  for (const VarState& st : trace)
    for (const ag::Var& c : st.v)
      for (double x : c.value().values()) EXPECT_EQ(x, 0.0);
}

TEST(MessagePass, ConformerMismatch) {
  Rng rng(5);
  GvpEncoder enc(GvpConfig{}, rng);
  ag::Tape tape;
  try {
    enc.h_geo(tape, chem::parse_smiles("CCO"), chem::assign_conformer(chem::parse_smiles("CC"), 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConformerMismatch);
  }
}

TEST(MessagePass, RigidMotionInvariance) {
  Rng rng(6);
  GvpEncoder enc(GvpConfig{}, rng);
  for (const std::string& s : oracle::fixture_smiles()) {
    const chem::MolecularGraph g = chem::parse_smiles(s);
    const chem::Conformer conf = chem::assign_conformer(g, 0);
    ag::Tape t0;
    std::vector<VarState> base;
    const Tensor h0 = GvpEncoder::pool(enc.message_pass(t0, featurize(g, conf), &base).s).value();
    for (int k = 0; k < 5; ++k) {
      const oracle::Mat3 r = oracle::random_rotation(rng);
      const chem::Vec3 t{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
      ag::Tape t1;
      std::vector<VarState> moved;
      const Tensor h1 =
          GvpEncoder::pool(enc.message_pass(t1, featurize(g, oracle::transform(conf, r, t)), &moved).s)
              .value();
      EXPECT_LT(max_diff(h0, h1), 1e-9) << s;
      for (std::size_t l = 0; l < base.size(); ++l) {
        const GVPState expect = rotate(base[l].value(), r);
        const GVPState got = moved[l].value();
        EXPECT_LT(max_diff(expect.s, got.s), 1e-9);
        for (int c = 0; c < 3; ++c) EXPECT_LT(max_diff(expect.v[c], got.v[c]), 1e-9);
      }
    }
  }
}

TEST(MessagePass, TranslationOnly) {
  Rng rng(7);
  GvpEncoder enc(GvpConfig{}, rng);
  const chem::MolecularGraph g = chem::parse_smiles("CC(=O)O");
  const chem::Conformer conf = chem::assign_conformer(g, 3);
  const oracle::Mat3 eye{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  ag::Tape a, b;
  EXPECT_LT(max_diff(enc.h_geo(a, g, conf).value(),
                     enc.h_geo(b, g, oracle::transform(conf, eye, {10.0, -3.0, 2.5})).value()),
            1e-12);
}

TEST(MessagePass, PermutationInvariance) {
  Rng rng(8);
  GvpEncoder enc(GvpConfig{}, rng);
  for (const std::string& s : oracle::fixture_smiles()) {
    const chem::MolecularGraph g = chem::parse_smiles(s);
    const chem::Conformer conf = chem::assign_conformer(g, 0);
    std::vector<std::size_t> order(g.atom_count());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    chem::Conformer pc = conf;
    for (std::size_t i = 0; i < order.size(); ++i) pc.coords[i] = conf.coords[order[i]];
    ag::Tape a, b;
    EXPECT_LT(max_diff(enc.h_geo(a, g, conf).value(),
                       enc.h_geo(b, chem::permute_atoms(g, order), pc).value()),
              1e-12)
        << s;
  }
}

TEST(Pool, MeanOfNodes) {
  ag::Tape t;
  const Tensor h = GvpEncoder::pool(t.constant(Tensor::matrix(2, 2, {1, 3, 3, 1}))).value();
  EXPECT_EQ(h, Tensor::matrix(1, 2, {2, 2}));
  const Tensor one = GvpEncoder::pool(t.constant(Tensor::matrix(1, 3, {1, 2, 3}))).value();
  EXPECT_EQ(one, Tensor::matrix(1, 3, {1, 2, 3}));
  try {
    featurize(chem::MolecularGraph{}, chem::Conformer{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyGraph);
  }
}

TEST(Adapter, ZeroWeightsGiveBias) {
  Rng rng(9);
  GvpEncoder enc(GvpConfig{}, rng);
  for (double& x : enc.adapter_in().weight.value.values()) x = 0.0;
  for (double& x : enc.adapter_out().weight.value.values()) x = 0.0;
  for (std::size_t i = 0; i < 64; ++i) enc.adapter_out().bias.value[i] = 0.5 * static_cast<double>(i);
  ag::Tape t;
  const Tensor out = enc.adapt(t, t.constant(Tensor::matrix(1, 32, 1.0))).value();
  EXPECT_EQ(out, enc.adapter_out().bias.value);
}

TEST(Adapter, HandArithmetic) {
  Rng rng(10);
  GvpEncoder enc(GvpConfig{2, 1, 1, 3, 2}, rng);
  enc.adapter_in().weight.value = Tensor::matrix(2, 3, {1, -1, 0.5, 2, 1, -1});
  enc.adapter_in().bias.value = Tensor::matrix(1, 3, {0.1, 0.2, -3.0});
  enc.adapter_out().weight.value = Tensor::matrix(3, 2, {1, 0, -2, 1, 4, 4});
  enc.adapter_out().bias.value = Tensor::matrix(1, 2, {0.5, -0.5});
  ag::Tape t;
  const Tensor out = enc.adapt(t, t.constant(Tensor::matrix(1, 2, {1.0, 0.5}))).value();
  // hidden pre = [1+1+0.1, -1+0.5+0.2, 0.5-0.5-3] = [2.1, -0.3, -3] -> relu [2.1, 0, 0]
  EXPECT_NEAR(out[0], 2.1 + 0.5, 1e-15);
  EXPECT_NEAR(out[1], -0.5, 1e-15);
  try {
    enc.adapt(t, t.constant(Tensor::matrix(1, 3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
}

TEST(Adapter, HMolGradients) {
  Rng rng(11);
  GvpEncoder enc(GvpConfig{8, 2, 2, 12, 6}, rng);
  ParamRefs ps;
  enc.collect(ps);
  const chem::MolecularGraph g = chem::parse_smiles("CC(=O)O");
  const chem::Conformer conf = chem::assign_conformer(g, 1);
  Tensor target = Tensor::matrix(1, 6);
  for (double& x : target.values()) x = rng.uniform(-1, 1);
  auto f = [&](ag::Tape& t) { return ag::mse(enc.h_mol(t, g, conf), t.constant(target)); };
  EXPECT_LT(ag::finite_diff_check(f, ps).max_rel_error, 1e-4);
}

TEST(Encoder, ParametersUseGvpPrefix) {
  Rng rng(12);
  GvpEncoder enc(GvpConfig{}, rng);
  ParamRefs ps;
  enc.collect(ps);
  for (Parameter* p : ps) EXPECT_EQ(p->name.rfind("gvp.", 0), 0u) << p->name;
}
