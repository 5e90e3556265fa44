//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "scm/chem/smiles.hpp"
#include "scm/core/checkpoint.hpp"
#include "scm/core/error.hpp"
#include "scm/core/gradcheck.hpp"
#include "scm/lm/tokenizer.hpp"
#include "scm/train/captions.hpp"
#include "scm/train/stage.hpp"

using namespace scm;
using namespace scm::train;

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

ModelConfig tiny() {
  ModelConfig c;
  c.gvp.scalar_width = 8;
  c.gvp.vector_width = 2;
  c.gvp.layers = 2;
  c.gvp.adapter_hidden = 16;
  c.lm.width = 16;
  c.lm.heads = 2;
  c.lm.mlp_width = 16;
  c.lm.blocks = 1;
  c.autoencoder.latent_width = 4;
  c.autoencoder.width = 16;
  c.autoencoder.heads = 2;
  c.autoencoder.mlp_width = 16;
  c.autoencoder.decoder_blocks = 1;
  c.denoiser.width = 16;
  c.denoiser.heads = 2;
  c.denoiser.mlp_width = 16;
  c.denoiser.blocks = 1;
  c.denoiser.cond_width = 8;
  c.diffusion_steps = 10;
  c.reaction.width = 16;
  c.reaction.heads = 2;
  c.reaction.mlp_width = 16;
  c.reaction.blocks = 1;
  return c;
}

Tensor logits_of(std::vector<double> probs) {
  Tensor t = Tensor::matrix(1, probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) t[i] = std::log(probs[i]);
  return t;
}

double kl_value(const Tensor& p_logits, const Tensor& q_logits) {
  ag::Tape t;
  return kl_regularizer(t.constant(p_logits), q_logits).item();
}

double ntxent_value(const Tensor& m, const Tensor& x, double tau = 0.07) {
  ag::Tape t;
  return ntxent_alignment_loss(t.constant(m), t.constant(x), tau).item();
}

std::vector<harness::TextPair> toy_pairs() {
  const std::string smiles[] = {"CCO", "c1ccccc1", "CC(=O)O", "CCN", "CC#N", "CCOC"};
  return templated_pairs(smiles);
}

rxn::ReactionSample toy_reaction(Models& m, Rng& rng) {
  rxn::PreparedReaction rx;
  const rxn::Role roles[] = {rxn::Role::Reactant, rxn::Role::Product};
  for (std::size_t i = 0; i < 2; ++i) {
    rx.smiles.push_back(i == 0 ? "CCO" : "CC=O");
    Tensor g = Tensor::matrix(1, m.config.reaction.geo_width);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = rng.normal();
    rx.h_geo.push_back(g);
    rxn::AmountVector a;
    a.v[0] = rng.normal();
    a.v[rxn::kAmountChannels] = 1.0;
    rx.amounts.push_back(a);
    rx.roles.push_back(roles[i]);
  }
  rx.yield = 0.3;
  return {rx, {1}};
}

std::vector<std::vector<double>> snapshot(const ParamRefs& ps) {
  std::vector<std::vector<double>> out;
  for (const Parameter* p : ps) out.emplace_back(p->value.values().begin(), p->value.values().end());
  return out;
}

std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "scm_test_train";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(Kl, ClosedForms) {
  const Tensor p = logits_of({0.75, 0.25});
  const Tensor q = logits_of({0.5, 0.5});
  EXPECT_EQ(kl_value(p, p), 0.0);
  const double oracle = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  EXPECT_NEAR(oracle, 0.1308, 1e-4);
  EXPECT_NEAR(kl_value(p, q), oracle, 1e-12);

  // asymmetry for (0.9, 0.1) vs (0.5, 0.5)
  const Tensor a = logits_of({0.9, 0.1});
  const double pq = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  const double qp = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  EXPECT_NEAR(kl_value(a, q), pq, 1e-12);
  EXPECT_NEAR(kl_value(q, a), qp, 1e-12);
  EXPECT_GT(std::abs(pq - qp), 0.1);

  EXPECT_EQ(error_code([&] { kl_value(p, Tensor::matrix(1, 3)); }), Errc::ShapeMismatch);
}

TEST(Kl, NonNegativeAndMeanOverRows) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor a = Tensor::matrix(3, 5), b = Tensor::matrix(3, 5);
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = 2 * rng.normal();
      b[k] = 2 * rng.normal();
    }
    EXPECT_GE(kl_value(a, b), 0.0);
    EXPECT_LT(std::abs(kl_value(a, a)), 1e-12);
  }
  // two rows: mean of the per-row values
  Tensor two = Tensor::matrix(2, 2), ref = Tensor::matrix(2, 2);
  two[0] = std::log(0.75);
  two[1] = std::log(0.25);
  EXPECT_NEAR(kl_value(two, ref), 0.5 * (0.75 * std::log(1.5) + 0.25 * std::log(0.5)), 1e-12);
}

TEST(Kl, ReferenceIsDetached) {
  Rng rng(2);
  Parameter x = nn::normal_param("test.x", {2, 4}, rng, 1.0);
  const Tensor ref = nn::normal_param("test.r", {2, 4}, rng, 1.0).value;
  auto f = [&](ag::Tape& t) { return kl_regularizer(t.param(x), ref); };
  EXPECT_LT(ag::finite_diff_check(f, {&x}).max_rel_error, 1e-4);
}

TEST(NtXent, ClosedForms) {
  // batch of one: the positive is the whole denominator
  EXPECT_EQ(ntxent_value(Tensor::matrix(1, 3, {1, 2, 3}), Tensor::matrix(1, 3, {-1, 0, 2})), 0.0);

  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const double e = std::exp(1.0 / 0.07);
  EXPECT_NEAR(ntxent_value(eye, eye), -std::log(e / (e + 1.0)), 1e-15);
  EXPECT_NEAR(-std::log(e / (e + 1.0)), 6.2e-7, 1e-8);

  const Tensor same = Tensor::matrix(2, 2, {1, 1, 1, 1});
  EXPECT_NEAR(ntxent_value(same, same), std::log(2.0), 1e-6);

  EXPECT_EQ(error_code([&] { ntxent_value(eye, Tensor::matrix(3, 2, 1.0)); }), Errc::LengthMismatch);
  EXPECT_EQ(error_code([&] { ntxent_value(eye, eye, 0.0); }), Errc::InvalidRange);
  ag::Tape t;
  EXPECT_EQ(error_code([&] { ntxent_alignment_loss(std::span<const ag::Var>{}, {}); }),
            Errc::EmptyBatch);
  const ag::Var one[] = {t.constant(Tensor::matrix(1, 2, 1.0))};
  EXPECT_EQ(error_code([&] { ntxent_alignment_loss(one, {}); }), Errc::LengthMismatch);
}

TEST(NtXent, OrthogonalInvariance) {
  Rng rng(3);
  const std::size_t b = 5, d = 4;
  Tensor m = Tensor::matrix(b, d), x = Tensor::matrix(b, d);
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = rng.normal();
    x[k] = rng.normal();
  }
  // product of random Givens rotations
  Tensor q = Tensor::matrix(d, d);
  for (std::size_t i = 0; i < d; ++i) q(i, i) = 1.0;
  for (int r = 0; r < 10; ++r) {
    const std::size_t i = rng.below(d), j = (i + 1 + rng.below(d - 1)) % d;
    const double th = rng.uniform(0.0, 6.28);
    for (std::size_t k = 0; k < d; ++k) {
      const double a = q(k, i), c = q(k, j);
      q(k, i) = std::cos(th) * a - std::sin(th) * c;
      q(k, j) = std::sin(th) * a + std::cos(th) * c;
    }
  }
  auto rotate = [&](const Tensor& t) {
    Tensor out = Tensor::matrix(b, d);
    for (std::size_t r = 0; r < b; ++r)
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t k = 0; k < d; ++k) out(r, c) += t(r, k) * q(k, c);
    return out;
  };
  EXPECT_NEAR(ntxent_value(m, x), ntxent_value(rotate(m), rotate(x)), 1e-9);
}

TEST(NtXent, Gradients) {
  Rng rng(4);
  Parameter m = nn::normal_param("test.m", {3, 4}, rng, 1.0);
  Parameter x = nn::normal_param("test.x", {3, 4}, rng, 1.0);
  auto f = [&](ag::Tape& t) { return ntxent_alignment_loss(t.param(m), t.param(x), 0.5); };
  EXPECT_LT(ag::finite_diff_check(f, {&m, &x}).max_rel_error, 1e-4);
}

TEST(TaskNames, RoundTripAndUnknown) {
  for (auto t : {TaskType::Lm, TaskType::Align, TaskType::Diffusion, TaskType::Reaction}) {
    EXPECT_EQ(task_from_name(task_name(t)), t);
  }
  EXPECT_EQ(error_code([] { task_from_name("vision"); }), Errc::UnknownTaskType);
}

TEST(JointLoss, MaskingAndAdditivity) {
  Rng init(5);
  Models models(tiny(), init);
  MoleculeCache cache;
  const auto pairs = toy_pairs();
  Rng data(6);
  const JointItem lm_item{"lm", caption_item(pairs[0])};
  const JointItem align_a{"align", AlignItem{pairs[1].smiles, pairs[1].description}};
  const JointItem align_b{"align", AlignItem{pairs[2].smiles, pairs[2].description}};
  const JointItem rxn_item{"reaction", toy_reaction(models, data)};
  LossWeights w;
  w.lm = 0.5;
  w.align = 2.0;
  w.rxn = 3.0;

  // only lm items: lambda_LM * L_LM and nothing else evaluated
  {
    ag::Tape t;
    Rng r(1);
    const JointItem batch[] = {lm_item};
    const auto terms = joint_loss(t, models, batch, w, cache, r);
    ASSERT_TRUE(terms.lm.has_value());
    EXPECT_FALSE(terms.align || terms.diffusion || terms.reaction);
    EXPECT_EQ(terms.total.item(), 0.5 * terms.lm->item());
  }
  // all weights zero, and the empty batch
  {
    ag::Tape t;
    Rng r(1);
    const JointItem batch[] = {lm_item, align_a, align_b, rxn_item};
    EXPECT_EQ(joint_loss(t, models, batch, LossWeights{0, 0, 0, 0, 0, 0, 0, 0, 0}, cache, r)
                  .total.item(),
              0.0);
    EXPECT_EQ(joint_loss(t, models, {}, w, cache, r).total.item(), 0.0);
  }
  // a mixed batch equals the sum of its per-type sub-batches
  {
    ag::Tape t;
    Rng r1(7), r2(7);
    const JointItem mixed[] = {align_a, rxn_item, lm_item, align_b};
    const double joint = joint_loss(t, models, mixed, w, cache, r1).total.item();
    const JointItem lm_only[] = {lm_item};
    const JointItem align_only[] = {align_a, align_b};
    const JointItem rxn_only[] = {rxn_item};
    const double parts = joint_loss(t, models, lm_only, w, cache, r2).total.item() +
                         joint_loss(t, models, align_only, w, cache, r2).total.item() +
                         joint_loss(t, models, rxn_only, w, cache, r2).total.item();
    EXPECT_NEAR(joint, parts, 1e-12);
  }
  // tags
  {
    ag::Tape t;
    Rng r(1);
    const JointItem unknown[] = {{"vision", AlignItem{"CCO", "x"}}};
    EXPECT_EQ(error_code([&] { joint_loss(t, models, unknown, w, cache, r); }),
              Errc::UnknownTaskType);
    const JointItem mismatched[] = {{"lm", AlignItem{"CCO", "x"}}};
    EXPECT_EQ(error_code([&] { joint_loss(t, models, mismatched, w, cache, r); }),
              Errc::UnknownTaskType);
  }
}

TEST(JointLoss, GradientIsWeightedSumOfTermGradients) {
  Rng init(8);
  Models models(tiny(), init);
  MoleculeCache cache;
  const auto pairs = toy_pairs();
  const JointItem batch[] = {{"lm", caption_item(pairs[0])},
                             {"align", AlignItem{pairs[1].smiles, pairs[1].description}},
                             {"align", AlignItem{pairs[3].smiles, pairs[3].description}}};
  ParamRefs ps = models.params();
  auto grads = [&](const LossWeights& w) {
    for (Parameter* p : ps) p->value.zero_grad();
    ag::Tape t;
    Rng r(1);
    t.backward(joint_loss(t, models, batch, w, cache, r).total);
    std::vector<double> g;
    for (Parameter* p : ps) {
      if (p->value.has_grad()) g.insert(g.end(), p->value.grad().begin(), p->value.grad().end());
      else g.insert(g.end(), p->value.size(), 0.0);
    }
    return g;
  };
  LossWeights both{2.0, 3.0, 1, 1, 1, 1, 1, 1, 1};
  LossWeights lm_only{1.0, 0.0, 1, 1, 1, 1, 1, 1, 1};
  LossWeights align_only{0.0, 1.0, 1, 1, 1, 1, 1, 1, 1};
  const auto g = grads(both), gl = grads(lm_only), ga = grads(align_only);
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    worst = std::max(worst, std::abs(g[k] - (2.0 * gl[k] + 3.0 * ga[k])));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(JointLoss, FiniteDifferences) {
  Rng init(9);
  Models models(tiny(), init);
  MoleculeCache cache;
  const auto pairs = toy_pairs();
  const JointItem batch[] = {{"lm", caption_item(pairs[0])},
                             {"align", AlignItem{pairs[1].smiles, pairs[1].description}},
                             {"align", AlignItem{pairs[4].smiles, pairs[4].description}}};
  ParamRefs ps;
  models.gvp.collect(ps);
  auto f = [&](ag::Tape& t) {
    Rng r(1);
    return joint_loss(t, models, batch, LossWeights{}, cache, r, 0.5).total;
  };
  ag::GradCheckOptions opt;
  opt.max_coords_per_param = 6;
  EXPECT_LT(ag::finite_diff_check(f, ps, opt).max_rel_error, 1e-4);
}

TEST(Captions, Templates) {
  EXPECT_EQ(caption(chem::parse_smiles("CCO")), "2 carbon, 1 oxygen; acyclic; hydroxyl");
  EXPECT_EQ(caption(chem::parse_smiles("c1ccncc1")),
            "5 carbon, 1 nitrogen; aromatic ring; aromatic nitrogen");
  EXPECT_EQ(caption(chem::parse_smiles("CC(=O)O")),
            "2 carbon, 2 oxygen; acyclic; carbonyl; carboxylic acid");
  EXPECT_EQ(caption(chem::parse_smiles("CC#N")), "2 carbon, 1 nitrogen; acyclic; nitrile");
  for (const auto& p : toy_pairs()) EXPECT_NO_THROW(lm::tokenize(p.description));
}

TEST(StageConfigParse, FullFile) {
  const std::string text =
      "# desk stage\n"
      "[stage]\n"
      "id = 2-joint\n"
      "steps = 12\n"
      "seed = 42\n"
      "batch = 4\n"
      "pairs = pairs.tsv\n"
      "reactions = /abs/r.jsonl\n"
      "[freeze]\n"
      "prefix = dit., rxn.\n"
      "prefix = lm.block0\n"
      "[weights]\n"
      "lm = 0.5  # trailing comment\n"
      "cls = 0\n"
      "[optimizer]\n"
      "lr = 1e-3\n"
      "cosine = false\n";
  const StageConfig c = parse_stage_config(text, "/base");
  EXPECT_EQ(c.id, StageId::Joint);
  EXPECT_EQ(c.steps, 12u);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.batch, 4u);
  EXPECT_EQ(c.pairs, std::filesystem::path("/base/pairs.tsv"));
  EXPECT_EQ(c.reactions, std::filesystem::path("/abs/r.jsonl"));
  EXPECT_EQ(c.freeze, (std::vector<std::string>{"dit.", "rxn.", "lm.block0"}));
  EXPECT_EQ(c.weights.lm, 0.5);
  EXPECT_EQ(c.weights.cls, 0.0);
  EXPECT_EQ(c.weights.align, 1.0);
  EXPECT_EQ(c.optimizer.lr, 1e-3);
  EXPECT_FALSE(c.optimizer.cosine);
  EXPECT_EQ(c.kl_weight, 0.1);
  EXPECT_EQ(effective_freeze(c), (std::vector<std::string>{"dit.", "rxn.", "lm.block0", "ae."}));
}

TEST(StageConfigParse, LineNumberedErrors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_stage_config(text);
    } catch (const LineError& e) {
      EXPECT_EQ(e.code(), Errc::ConfigError);
      return e.line();
    }
    ADD_FAILURE() << "accepted: " << text;
    return 0;
  };
  EXPECT_EQ(line_of("[stage]\nid = 2-joint\n[extras]\n"), 3u);
  EXPECT_EQ(line_of("[stage]\nid = 5-magic\n"), 2u);
  EXPECT_EQ(line_of("[stage]\nid = 1-align\nsteps = many\n"), 3u);
  EXPECT_EQ(line_of("[stage]\nid = 1-align\n[weights]\nlm = -1\n"), 4u);
  EXPECT_EQ(line_of("[stage]\nid = 1-align\n[weights]\ngamma = 1\n"), 4u);
  EXPECT_EQ(line_of("steps = 3\n"), 1u);
  EXPECT_EQ(line_of("[stage]\nsteps = 3\n"), 3u);
  EXPECT_EQ(line_of("[stage]\nid = 1-align\nnonsense\n"), 3u);
  const StageConfig align = parse_stage_config("[stage]\nid = 1-align\n");
  EXPECT_EQ(effective_freeze(align), (std::vector<std::string>{"lm.", "ae.", "dit.", "rxn."}));
}

TEST(RunStage, FreezeContractAndZeroSteps) {
  Rng init(10);
  Models models(tiny(), init);
  StageCorpora corpora;
  corpora.pairs = toy_pairs();
  corpora.smiles = {"CCO", "CCN"};

  StageConfig c;
  c.id = StageId::Joint;
  c.steps = 3;
  c.batch = 6;
  c.freeze = {"dit."};
  c.optimizer.lr = 1e-2;
  ParamRefs dit, gvp, ae;
  models.denoiser.collect(dit);
  models.gvp.collect(gvp);
  models.autoencoder.collect(ae);
  const auto dit0 = snapshot(dit), gvp0 = snapshot(gvp), ae0 = snapshot(ae);
  const StageResult r = run_stage(c, models, corpora);
  EXPECT_EQ(snapshot(dit), dit0);
  EXPECT_EQ(snapshot(ae), ae0);  // implied in stage 2
  EXPECT_NE(snapshot(gvp), gvp0);
  EXPECT_GT(r.frozen, 0u);
  for (const Parameter* p : dit) EXPECT_TRUE(p->trainable) << "flags restored";
  std::size_t joint_rows = 0;
  for (const auto& m : r.metrics) joint_rows += m.task == "joint";
  EXPECT_EQ(joint_rows, 3u);

  // zero steps leave the checkpoint equal to the initialization
  const auto dir = temp_dir();
  StageConfig zero = c;
  zero.steps = 0;
  zero.checkpoint = dir / "zero.ckpt";
  zero.metrics = dir / "zero.csv";
  ParamRefs all = models.params();
  const auto before = snapshot(all);
  run_stage(zero, models, corpora);
  const auto saved = checkpoint::load(zero.checkpoint);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Tensor& t = saved.at(all[i]->name);
    EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()), before[i]);
  }
  std::ifstream csv(zero.metrics);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "step,task,loss");

  StageConfig all_frozen = c;
  all_frozen.freeze = {""};
  EXPECT_EQ(error_code([&] { run_stage(all_frozen, models, corpora); }), Errc::FrozenAllParams);
}

TEST(RunStage, AlignTouchesOnlyTheEncoder) {
  Rng init(11);
  Models models(tiny(), init);
  StageCorpora corpora;
  corpora.pairs = toy_pairs();
  StageConfig c;
  c.id = StageId::Align;
  c.steps = 2;
  c.batch = 4;
  ParamRefs lm, gvp;
  models.lm.collect(lm);
  models.gvp.collect(gvp);
  const auto lm0 = snapshot(lm), gvp0 = snapshot(gvp);
  run_stage(c, models, corpora);
  EXPECT_EQ(snapshot(lm), lm0);
  EXPECT_NE(snapshot(gvp), gvp0);
}

TEST(RunStage, PretrainLogsKlAndRotatesTasks) {
  Rng init(12);
  Models models(tiny(), init);
  StageCorpora corpora;
  corpora.pairs = toy_pairs();
  corpora.smiles = {"CCO", "CC=O"};
  StageConfig c;
  c.id = StageId::Pretrain;
  c.steps = 4;
  c.batch = 2;
  const StageResult r = run_stage(c, models, corpora);
  std::vector<std::string> tasks;
  for (const auto& m : r.metrics) tasks.push_back(m.task);
  // step 0 autoencoder, step 1 kl + lm, then again
  EXPECT_EQ(tasks, (std::vector<std::string>{"autoencoder", "kl", "lm", "autoencoder", "kl", "lm"}));
  // first KL is against an identical snapshot
  EXPECT_EQ(r.metrics[1].loss, 0.0);
}

TEST(RunStage, CorpusErrorsCarryLineNumbers) {
  const auto dir = temp_dir();
  {
    std::ofstream f(dir / "bad_pairs.tsv");
    f << "CCO\tethanol\nC(\t desc\n";
  }
  StageConfig c;
  c.pairs = dir / "bad_pairs.tsv";
  try {
    load_stage_corpora(c);
    FAIL() << "accepted a bad corpus";
  } catch (const LineError& e) {
    EXPECT_EQ(e.code(), Errc::CorpusParseError);
    EXPECT_EQ(e.line(), 2u);
  }
}
