//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scm/core/error.hpp"
#include "scm/core/gradcheck.hpp"
#include "scm/rxn/reaction.hpp"

using namespace scm;
using namespace scm::rxn;

namespace {

template <typename F>
Errc error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

ReactionConfig small() {
  ReactionConfig c;
  c.geo_width = 4;
  c.width = 8;
  c.heads = 2;
  c.mlp_width = 8;
  c.blocks = 1;
  return c;
}

Parameter& find(const ParamRefs& ps, const std::string& name) {
  for (Parameter* p : ps) {
    if (p->name == name) return *p;
  }
  throw std::runtime_error("no parameter " + name);
}

void set_all(Tensor& t, double v) { t = Tensor(t.shape(), v); }

std::vector<double> values(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// reactant, reactant, solvent, product with random geometry and amounts
PreparedReaction random_reaction(std::size_t geo, Rng& rng) {
  PreparedReaction rx;
  const Role roles[] = {Role::Reactant, Role::Reactant, Role::Solvent, Role::Product};
  for (std::size_t i = 0; i < 4; ++i) {
    rx.smiles.push_back("C" + std::string(i, 'C'));
    Tensor g = Tensor::matrix(1, geo);
    for (std::size_t k = 0; k < geo; ++k) g[k] = rng.normal();
    rx.h_geo.push_back(g);
    AmountVector a;
    for (std::size_t c = 0; c < kAmountChannels; ++c) {
      if (!rng.bernoulli(0.5)) continue;
      a.v[c] = rng.normal();
      a.v[kAmountChannels + c] = 1.0;
    }
    rx.amounts.push_back(a);
    rx.roles.push_back(roles[i]);
  }
  rx.yield = 0.42;
  return rx;
}

PreparedReaction permuted(const PreparedReaction& rx, std::span<const std::size_t> perm) {
  PreparedReaction out;
  for (std::size_t i : perm) {
    out.smiles.push_back(rx.smiles[i]);
    out.h_geo.push_back(rx.h_geo[i]);
    out.amounts.push_back(rx.amounts[i]);
    out.roles.push_back(rx.roles[i]);
  }
  out.yield = rx.yield;
  return out;
}

}  // namespace

TEST(Roles, NamesAndErrors) {
  EXPECT_EQ(role_from_name("catalyst"), Role::Catalyst);
  EXPECT_EQ(role_name(Role::Solvent), "solvent");
  EXPECT_EQ(error_code([] { role_from_name("enzyme"); }), Errc::UnknownRole);
  EXPECT_EQ(amount_channel_name(4), "equivalents");
}

TEST(BinYield, FloorArithmetic) {
  EXPECT_EQ(bin_yield(0.0), 0u);
  EXPECT_EQ(bin_yield(100.0), 9u);
  EXPECT_EQ(bin_yield(57.60), 5u);
  EXPECT_EQ(bin_yield(9.999), 0u);
  EXPECT_EQ(bin_yield(10.0), 1u);
  EXPECT_EQ(error_code([] { bin_yield(-0.1); }), Errc::OutOfRange);
  EXPECT_EQ(error_code([] { bin_yield(100.5); }), Errc::OutOfRange);
  EXPECT_EQ(error_code([] { bin_yield(std::nan("")); }), Errc::OutOfRange);
}

TEST(Record, Validation) {
  ReactionRecord r;
  r.molecules = {{"CCO", Role::Reactant, {}}};
  EXPECT_EQ(error_code([&] { check_record(r); }), Errc::InvalidRange);
  r.molecules.push_back({"CC=O", Role::Product, {}});
  EXPECT_NO_THROW(check_record(r));
  r.yield_percent = 101.0;
  EXPECT_EQ(error_code([&] { check_record(r); }), Errc::OutOfRange);
}

TEST(Normalizer, FitsPresentChannelsOnly) {
  ReactionRecord r;
  ReactionMolecule a{"C", Role::Reactant, {}}, b{"CC", Role::Product, {}};
  a.amounts.raw[0] = 1.0;
  b.amounts.raw[0] = 3.0;
  r.molecules = {a, b};
  const ReactionRecord corpus[] = {r};
  const auto n = AmountNormalizer::fit(corpus);
  EXPECT_DOUBLE_EQ(n.mean(0), 2.0);
  EXPECT_DOUBLE_EQ(n.scale(0), 1.0);
  EXPECT_EQ(n.mean(1), 0.0);
  EXPECT_EQ(n.scale(1), 1.0);
  const AmountVector v = n.apply(b.amounts);
  EXPECT_DOUBLE_EQ(v.v[0], 1.0);
  EXPECT_EQ(v.v[kAmountChannels], 1.0);
  for (std::size_t c = 1; c < kAmountChannels; ++c) {
    EXPECT_EQ(v.v[c], 0.0);
    EXPECT_EQ(v.v[kAmountChannels + c], 0.0);
  }
}

TEST(Token, ZeroInputsGiveZeroToken) {
  Rng rng(1);
  ReactionModel model(small(), rng);
  ParamRefs ps;
  model.collect(ps);
  set_all(find(ps, "rxn.role").value, 0.0);
  set_all(find(ps, "rxn.type").value, 0.0);
  ag::Tape t;
  const ag::Var tok = model.token(t, t.constant(Tensor::matrix(1, 4)),
                              t.constant(Tensor::matrix(1, kAmountWidth)), 2, TokenType::Observed);
  for (double x : tok.value().values()) EXPECT_EQ(x, 0.0);
}

TEST(Token, HandComputedSum) {
  ReactionConfig c = small();
  c.geo_width = 2;
  c.width = 2;
  c.heads = 1;
  Rng rng(2);
  ReactionModel model(c, rng);
  ParamRefs ps;
  model.collect(ps);
  // identity on geometry; identity on the first two value channels
  find(ps, "rxn.f_mol.weight").value = Tensor::matrix(2, 2, {1, 0, 0, 1});
  Tensor wa = Tensor::matrix(kAmountWidth, 2);
  wa(0, 0) = 1.0;
  wa(1, 1) = 1.0;
  find(ps, "rxn.f_amt.weight").value = wa;
  set_all(find(ps, "rxn.role").value, 0.0);
  find(ps, "rxn.role").value(1, 0) = 0.25;
  find(ps, "rxn.type").value = Tensor::matrix(2, 2, {0, 3, -1, -1});

  Tensor amounts = Tensor::matrix(1, kAmountWidth);
  amounts[0] = 0.5;
  amounts[1] = -1.0;
  amounts[kAmountChannels] = 1.0;
  amounts[kAmountChannels + 1] = 1.0;
  ag::Tape t;
  const ag::Var tok = model.token(t, t.constant(Tensor::matrix(1, 2, {1, 2})), t.constant(amounts), 1,
                              TokenType::Observed);
  // (1,2) + (0.5,-1) + (0.25,0) + (0,3)
  EXPECT_DOUBLE_EQ(tok.value()[0], 1.75);
  EXPECT_DOUBLE_EQ(tok.value()[1], 4.0);

  // a cleared flag drops its value channel
  amounts[kAmountChannels + 1] = 0.0;
  const ag::Var gated = model.token(t, t.constant(Tensor::matrix(1, 2, {1, 2})), t.constant(amounts),
                                1, TokenType::Observed);
  EXPECT_DOUBLE_EQ(gated.value()[1], 5.0);

  // masked target: geometry is absent, masked type embedding
  const ag::Var masked = model.token(t, t.constant(Tensor::matrix(1, 2)), t.constant(amounts), 1,
                                 TokenType::Masked);
  EXPECT_DOUBLE_EQ(masked.value()[0], 0.5 + 0.25 - 1.0);
  EXPECT_DOUBLE_EQ(masked.value()[1], -1.0);

  EXPECT_EQ(error_code([&] {
              model.token(t, t.constant(Tensor::matrix(1, 2)), t.constant(amounts), 5,
                          TokenType::Observed);
            }),
            Errc::UnknownRole);
  EXPECT_EQ(error_code([&] {
              model.token(t, t.constant(Tensor::matrix(1, 2)), t.constant(Tensor::matrix(1, 3)),
                          0, TokenType::Observed);
            }),
            Errc::ShapeMismatch);
}

TEST(Token, ClearedFlagZeroesValueGradient) {
  Rng rng(3);
  ReactionModel model(small(), rng);
  Tensor a = Tensor::matrix(1, kAmountWidth);
  for (std::size_t c = 0; c < kAmountChannels; ++c) a[c] = rng.normal();
  a[kAmountChannels + 0] = 1.0;
  a[kAmountChannels + 3] = 1.0;
  Parameter amounts("test.amounts", a);
  amounts.value.grad().assign(kAmountWidth, 0.0);
  ag::Tape t;
  const ag::Var tok = model.token(t, t.constant(Tensor::matrix(1, 4, 0.3)), t.param(amounts), 0,
                              TokenType::Observed);
  t.backward(ag::sum(ag::square(tok)));
  const auto& g = amounts.value.grad();
  for (std::size_t c : {1u, 2u, 4u}) EXPECT_EQ(g[c], 0.0) << "channel " << c;
  EXPECT_NE(g[0], 0.0);
  EXPECT_NE(g[3], 0.0);
}

TEST(Encode, ShapesAndErrors) {
  Rng rng(4);
  ReactionModel model(small(), rng);
  const PreparedReaction rx = random_reaction(4, rng);
  ag::Tape t;
  const std::span<const std::size_t> none;
  const auto enc = model.encode(t, rx, none);
  EXPECT_EQ(enc.tokens.rows(), 4u);
  EXPECT_EQ(enc.cls.rows(), 1u);
  EXPECT_EQ(enc.tokens.cols(), 8u);
  const std::size_t bad[] = {4};
  EXPECT_EQ(error_code([&] { model.encode(t, rx, bad); }), Errc::IndexOutOfRange);
  EXPECT_EQ(error_code([&] { model.predict_masked(t, enc, none); }), Errc::EmptyMask);
  const std::size_t prod[] = {3};
  const auto pred = model.predict_masked(rx, prod);
  ASSERT_EQ(pred.size(), 1u);
  EXPECT_EQ(pred[0].cols(), 4u);
}

TEST(Encode, PermutationInvariance) {
  Rng rng(5);
  ReactionModel model(small(), rng);
  for (int trial = 0; trial < 20; ++trial) {
    const PreparedReaction rx = random_reaction(4, rng);
    std::vector<std::size_t> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    if (trial == 0) {
      std::swap(perm[0], perm[1]);  // same-role pair
    } else {
      for (std::size_t i = 3; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    const PreparedReaction px = permuted(rx, perm);
    // masked product follows its molecule
    const std::size_t mask[] = {3};
    const std::size_t pmask[] = {static_cast<std::size_t>(
        std::find(perm.begin(), perm.end(), 3) - perm.begin())};
    ag::Tape t1, t2;
    const auto a = model.encode(t1, rx, mask);
    const auto b = model.encode(t2, px, pmask);
    EXPECT_EQ(values(a.cls.value()), values(b.cls.value()));
    for (std::size_t k = 0; k < 4; ++k) {
      const auto ra = a.tokens.value().row_span(perm[k]);
      const auto rb = b.tokens.value().row_span(k);
      EXPECT_TRUE(std::equal(ra.begin(), ra.end(), rb.begin()));
    }
    const auto ya = model.predict_yield(rx, mask);
    const auto yb = model.predict_yield(px, pmask);
    EXPECT_EQ(ya.reg, yb.reg);
    EXPECT_EQ(ya.cls, yb.cls);
    EXPECT_EQ(values(model.predict_masked(rx, mask)[0]),
              values(model.predict_masked(px, pmask)[0]));
  }
}

TEST(Encode, MaskedContentNeverInfluencesOutputs) {
  Rng rng(6);
  ReactionModel model(small(), rng);
  for (std::size_t slot = 0; slot < 4; ++slot) {
    const PreparedReaction rx = random_reaction(4, rng);
    PreparedReaction other = rx;
    other.smiles[slot] = "c1ccccc1";
    for (std::size_t k = 0; k < 4; ++k) other.h_geo[slot][k] = rng.normal();
    const std::size_t mask[] = {slot};
    ag::Tape t1, t2;
    const auto a = model.encode(t1, rx, mask);
    const auto b = model.encode(t2, other, mask);
    EXPECT_EQ(values(a.tokens.value()), values(b.tokens.value()));
    EXPECT_EQ(values(a.cls.value()), values(b.cls.value()));
    EXPECT_EQ(values(model.predict_masked(rx, mask)[0]),
              values(model.predict_masked(other, mask)[0]));
  }
}

TEST(Yield, ZeroHeadsAndSoftmax) {
  Rng rng(7);
  ReactionModel model(ReactionConfig{}, rng);
  const Tensor cls = Tensor::matrix(1, 64, 0.7);
  const auto p = model.predict_yield(cls);
  ASSERT_EQ(p.cls.size(), kYieldBins);
  EXPECT_NEAR(std::accumulate(p.cls.begin(), p.cls.end(), 0.0), 1.0, 1e-9);
  EXPECT_GE(p.reg, 0.0);
  EXPECT_LE(p.reg, 1.0);

  ParamRefs ps;
  model.collect(ps);
  set_all(find(ps, "rxn.reg_head.weight").value, 0.0);
  set_all(find(ps, "rxn.cls_head.weight").value, 0.0);
  const auto z = model.predict_yield(cls);
  EXPECT_EQ(z.reg, 0.5);
  EXPECT_EQ(z.percent(), 50.0);
  for (double q : z.cls) EXPECT_NEAR(q, 0.1, 1e-15);
}

TEST(Retrieval, ArgmaxAndTies) {
  std::vector<LibraryEntry> lib = {{"a", Tensor::row(std::vector<double>{-1, 0})},
                                   {"b", Tensor::row(std::vector<double>{0, -1})},
                                   {"c", Tensor::row(std::vector<double>{1, 0})},
                                   {"d", Tensor::row(std::vector<double>{-1, -1})},
                                   {"e", Tensor::row(std::vector<double>{-1, 0.1})},
                                   {"f", Tensor::row(std::vector<double>{0, 1})}};
  // (1,1) has cosine 1/sqrt(2) to both c (2) and f (5)
  EXPECT_EQ(retrieve_index(Tensor::row(std::vector<double>{1, 1}), lib), 2u);
  for (std::size_t i = 0; i < lib.size(); ++i) {
    EXPECT_EQ(retrieve_nearest(lib[i].h_geo, lib), lib[i].smiles);
  }
  const LibraryEntry one[] = {lib[3]};
  EXPECT_EQ(retrieve_nearest(Tensor::row(std::vector<double>{5, 5}), one), "d");
  EXPECT_EQ(error_code([] { retrieve_index(Tensor::matrix(1, 2), {}); }), Errc::EmptyLibrary);
  EXPECT_EQ(error_code([&] { retrieve_index(Tensor::matrix(1, 3), lib); }), Errc::WidthMismatch);
}

TEST(ReactionLoss, ZeroCases) {
  Rng rng(8);
  ReactionModel model(small(), rng);
  PreparedReaction rx = random_reaction(4, rng);
  rx.yield.reset();
  const ReactionSample unlabeled[] = {{rx, {3}}};
  {
    ag::Tape t;
    const auto L = reaction_loss(t, model, unlabeled, RxnLossWeights{}, rng);
    EXPECT_EQ(L.yield.item(), 0.0);
    EXPECT_GT(L.emb.item(), 0.0);
    EXPECT_GE(L.amt.item(), 0.0);
  }
  {
    ag::Tape t;
    RxnLossWeights zero{0, 0, 0, 0, 0};
    rx.yield = 0.9;
    const ReactionSample labeled[] = {{rx, {3}}};
    EXPECT_EQ(reaction_loss(t, model, labeled, zero, rng).total.item(), 0.0);
  }
  {
    // head outputs the target embedding; regression sits on y = 0.5
    ParamRefs ps;
    model.collect(ps);
    set_all(find(ps, "rxn.mol_head.weight").value, 0.0);
    Tensor& bias = find(ps, "rxn.mol_head.bias").value;
    for (std::size_t k = 0; k < 4; ++k) bias[k] = rx.h_geo[3][k];
    set_all(find(ps, "rxn.reg_head.weight").value, 0.0);
    rx.yield = 0.5;
    const ReactionSample perfect[] = {{rx, {3}}};
    RxnLossWeights w;
    w.cls = 0.0;
    ag::Tape t;
    const auto L = reaction_loss(t, model, perfect, w, rng, 0.0);
    EXPECT_EQ(L.emb.item(), 0.0);
    EXPECT_EQ(L.amt.item(), 0.0);
    EXPECT_EQ(L.yield.item(), 0.0);
    EXPECT_EQ(L.total.item(), 0.0);
  }
  ag::Tape t;
  EXPECT_EQ(error_code([&] { reaction_loss(t, model, {}, RxnLossWeights{}, rng); }),
            Errc::EmptyBatch);
}

TEST(ReactionLoss, HiddenAmountsAreReconstructionTargets) {
  Rng rng(9);
  ReactionModel model(small(), rng);
  const PreparedReaction rx = random_reaction(4, rng);
  const ReactionSample batch[] = {{rx, {}}};
  ag::Tape t;
  // everything present is hidden
  const auto L = reaction_loss(t, model, batch, RxnLossWeights{}, rng, 1.0);
  EXPECT_GT(L.amt.item(), 0.0);
  EXPECT_EQ(L.emb.item(), 0.0);
  ag::Tape t2;
  EXPECT_EQ(reaction_loss(t2, model, batch, RxnLossWeights{}, rng, 0.0).amt.item(), 0.0);
}

TEST(ReactionLoss, Gradients) {
  Rng rng(10);
  ReactionModel model(small(), rng);
  ParamRefs ps;
  model.collect(ps);
  const PreparedReaction a = random_reaction(4, rng);
  PreparedReaction b = random_reaction(4, rng);
  b.yield = 0.87;
  const ReactionSample batch[] = {{a, {3}}, {b, {0}}};
  auto f = [&](ag::Tape& t) {
    Rng fixed(99);  // same hidden channels on every evaluation
    return reaction_loss(t, model, batch, RxnLossWeights{}, fixed, 0.3).total;
  };
  EXPECT_LT(ag::finite_diff_check(f, ps).max_rel_error, 1e-4);
}

TEST(Synthetic, YieldFollowsGeneratingFunction) {
  Rng rng(11);
  const auto corpus = synthetic_linear_yield(200, rng);
  ASSERT_EQ(corpus.size(), 200u);
  for (const auto& r : corpus) {
    EXPECT_NO_THROW(check_record(r));
    double moles = 0, equiv = 0, volume = 0;
    for (const auto& m : r.molecules) {
      if (m.amounts.raw[0]) moles = *m.amounts.raw[0];
      if (m.amounts.raw[4]) equiv = *m.amounts.raw[4];
      if (m.role == Role::Solvent) volume = *m.amounts.raw[2];
    }
    const double expect = std::min(100.0, std::max(0.0, 10 + 30 * moles + 15 * equiv - 2 * volume));
    ASSERT_TRUE(r.yield_percent.has_value());
    EXPECT_DOUBLE_EQ(*r.yield_percent, expect);
  }
}
