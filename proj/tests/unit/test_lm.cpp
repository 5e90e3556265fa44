//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"
#include "scm/core/gradcheck.hpp"
#include "scm/lm/model.hpp"

using namespace scm;
using namespace scm::lm;

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

LmConfig tiny() {
  LmConfig c;
  c.width = 8;
  c.heads = 2;
  c.mlp_width = 8;
  c.blocks = 1;
  return c;
}

Tensor row(std::size_t d, double v) { return Tensor::matrix(1, d, v); }

DispatchHandlers constant_handlers(std::size_t d) {
  DispatchHandlers h;
  h.perceive = [d](const std::string& s) { return row(d, 0.01 * static_cast<double>(s.size())); };
  h.generate = [](const Tensor&) { return std::string("CCO"); };
  h.react = [](const std::string&) { return std::string("<mol>CC(=O)O</mol> yield 75.0"); };
  return h;
}

// Brute-force maximality: no span can be extended at its end, and no skipped
// start position begins a valid substring that fits before the next span.
bool spans_are_maximal(const std::string& text, const std::vector<Span>& spans) {
  std::size_t next = 0;
  for (std::size_t k = 0; k <= spans.size(); ++k) {
    const std::size_t stop = k < spans.size() ? spans[k].begin : text.size();
    for (std::size_t i = next; i < stop; ++i) {
      for (std::size_t len = 2; i + len <= text.size(); ++len) {
        if (chem::check_validity(text.substr(i, len))) return false;
      }
    }
    if (k == spans.size()) break;
    for (std::size_t len = spans[k].length + 1; spans[k].begin + len <= text.size(); ++len) {
      if (chem::check_validity(text.substr(spans[k].begin, len))) return false;
    }
    next = spans[k].end();
  }
  return true;
}

}  // namespace

TEST(Tokenizer, RoundTripWithMarkers) {
  const std::string text = "<bos>make <mol>CCO</mol> <d:generate><d:react><d:perceive><eos><pad>";
  const std::vector<int> ids = tokenize(text);
  EXPECT_EQ(ids.front(), kBos);
  EXPECT_EQ(ids[6], kMolOpen);
  EXPECT_EQ(detokenize(ids), text);
  EXPECT_EQ(plain_text(ids), "make CCO ");
  EXPECT_EQ(tokenize(" ")[0], kSpecialCount);
  EXPECT_EQ(tokenize("~")[0], kVocabSize - 1);
  EXPECT_EQ(kVocabSize, 103);
  EXPECT_EQ(tokenize("<x>").size(), 3u);
}

TEST(Tokenizer, Errors) {
  EXPECT_EQ(error_code([] { tokenize("tab\there"); }), Errc::VocabOverflow);
  EXPECT_EQ(error_code([] { tokenize("caf\xc3\xa9"); }), Errc::VocabOverflow);
  const std::vector<int> bad{kVocabSize};
  EXPECT_EQ(error_code([&] { detokenize(bad); }), Errc::VocabOverflow);
}

TEST(Entities, Examples) {
  const auto one = detect_entities("dissolve CCO in water");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (Span{9, 3}));
  EXPECT_TRUE(detect_entities("no molecules here").empty());
  const auto two = detect_entities("CCO and c1ccccc1");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (Span{0, 3}));
  EXPECT_EQ(two[1], (Span{8, 8}));
  EXPECT_TRUE(detect_entities("").empty());
  EXPECT_TRUE(detect_entities("C").empty());
}

TEST(Entities, SpansValidDisjointMaximal) {
  Rng rng(3);
  const std::string alphabet = "CNOc1()= =#ab";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t n = 1 + rng.below(14);
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng.below(alphabet.size())];
    const auto spans = detect_entities(text);
    std::size_t prev_end = 0;
    for (const Span& s : spans) {
      EXPECT_GE(s.begin, prev_end);
      EXPECT_GE(s.length, 2u);
      EXPECT_TRUE(chem::check_validity(text.substr(s.begin, s.length))) << text;
      prev_end = s.end();
    }
    EXPECT_TRUE(spans_are_maximal(text, spans)) << text;
  }
}

TEST(Backbone, ShapeAndCausality) {
  Rng rng(1);
  const LanguageModel lm(LmConfig{}, rng);
  const HiddenStates h = lm.encode_text(std::vector<int>{kBos});
  EXPECT_EQ(h.rows.rows(), 1u);
  EXPECT_EQ(h.rows.cols(), 64u);

  const std::vector<int> a = tokenize("<bos>CCO is ethanol");
  std::vector<int> b = a;
  b.push_back(tokenize("Z")[0]);
  std::vector<int> c = a;
  c.back() = tokenize("q")[0];
  const Tensor la = lm.logits(Context(a)), lb = lm.logits(Context(b)), lc = lm.logits(Context(c));
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t k = 0; k < la.cols(); ++k) EXPECT_EQ(la(r, k), lb(r, k));
  }
  for (std::size_t r = 0; r + 1 < a.size(); ++r) {
    for (std::size_t k = 0; k < la.cols(); ++k) EXPECT_EQ(la(r, k), lc(r, k));
  }
  EXPECT_EQ(error_code([&] { lm.encode_text(std::vector<int>{kVocabSize}); }), Errc::VocabOverflow);
  EXPECT_EQ(error_code([&] { lm.encode_text(std::vector<int>{}); }), Errc::InvalidRange);
}

TEST(Injection, AppendsFlaggedRows) {
  Rng rng(2);
  const LanguageModel lm(tiny(), rng);
  const HiddenStates h = lm.encode_text(tokenize("<bos>CC"));
  EXPECT_EQ(inject_structural_tokens(h, {}).rows, h.rows);
  const Tensor m1 = row(8, 1.5), m2 = row(8, -2.0);
  const Tensor one[] = {m1};
  const HiddenStates h1 = inject_structural_tokens(h, one);
  EXPECT_EQ(h1.size(), h.size() + 1);
  EXPECT_TRUE(h1.structural.back());
  EXPECT_EQ(h1.rows(3, 4), 1.5);
  const Tensor two[] = {m1, m2};
  const HiddenStates h2 = inject_structural_tokens(h, two);
  EXPECT_EQ(h2.rows(3, 0), 1.5);
  EXPECT_EQ(h2.rows(4, 0), -2.0);
  EXPECT_EQ(h2.structural_count(), 2u);
  const Tensor wrong[] = {row(7, 0.0)};
  EXPECT_EQ(error_code([&] { inject_structural_tokens(h, wrong); }), Errc::WidthMismatch);
}

TEST(Injection, EarlierLogitsUnchanged) {
  Rng rng(4);
  const LanguageModel lm(tiny(), rng);
  const std::vector<int> ids = tokenize("<bos>mix CCO now");
  const Context plain(ids);
  const Context injected = build_context(ids, constant_handlers(8));
  ASSERT_EQ(injected.size(), ids.size() + 1);
  EXPECT_EQ(injected.structural_count(), 1u);
  const Tensor lp = lm.logits(plain), li = lm.logits(injected);
  // "<bos>mix CCO" is 8 tokens; rows up to the entity end are shared
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t k = 0; k < lp.cols(); ++k) EXPECT_EQ(lp(r, k), li(r, k));
  }
}

TEST(Injection, MolMarkersPlaceRowAfterClose) {
  const std::vector<int> ids = tokenize("<bos><mol>CCO</mol>ok");
  const Context ctx = build_context(ids, constant_handlers(8));
  ASSERT_EQ(ctx.size(), ids.size() + 1);
  EXPECT_EQ(ctx.tokens(), ids);
  Rng rng(5);
  const LanguageModel lm(tiny(), rng);
  const HiddenStates h = lm.encode(ctx);
  EXPECT_TRUE(h.structural[6]);
  EXPECT_EQ(h.structural_count(), 1u);
  EXPECT_EQ(build_context(ids, DispatchHandlers{}).size(), ids.size());
}

TEST(LmLoss, UniformLogitsGiveLogVocab) {
  Rng rng(6);
  LanguageModel lm(LmConfig{}, rng);
  ParamRefs ps;
  lm.collect(ps);
  for (Parameter* p : ps) {
    if (p->name.rfind("lm.head", 0) == 0) p->value = Tensor(p->value.shape(), 0.0);
  }
  const LmExample ex{tokenize("<bos>"), {}, tokenize("CCO<eos>")};
  ag::Tape tape;
  const LmExample batch[] = {ex};
  EXPECT_NEAR(lm_loss(tape, lm, batch).item(), std::log(103.0), 1e-9);

  LmConfig small = tiny();
  small.vocab = 32;
  Rng r2(7);
  LanguageModel lm32(small, r2);
  ParamRefs ps32;
  lm32.collect(ps32);
  for (Parameter* p : ps32) {
    if (p->name.rfind("lm.head", 0) == 0) p->value = Tensor(p->value.shape(), 0.0);
  }
  const LmExample ex32{{kBos}, {}, {9, 10, 11, kEos}};
  const LmExample batch32[] = {ex32};
  ag::Tape t2;
  EXPECT_NEAR(lm_loss(t2, lm32, batch32).item(), std::log(32.0), 1e-9);
}

TEST(LmLoss, PadMaskedAndErrors) {
  Rng rng(8);
  const LanguageModel lm(tiny(), rng);
  const LmExample a{tokenize("<bos>"), {}, tokenize("CC<eos>")};
  LmExample b = a;
  b.target.push_back(kPad);
  b.target.push_back(kPad);
  ag::Tape t1, t2;
  const LmExample ba[] = {a}, bb[] = {b};
  EXPECT_EQ(lm_loss(t1, lm, ba).item(), lm_loss(t2, lm, bb).item());
  ag::Tape t3;
  EXPECT_EQ(error_code([&] { lm_loss(t3, lm, {}); }), Errc::EmptyBatch);
  const LmExample padded[] = {LmExample{{kBos}, {}, {kPad}}};
  EXPECT_EQ(error_code([&] { lm_loss(t3, lm, padded); }), Errc::EmptyBatch);
}

TEST(LmLoss, GradientsIncludingStructuralRows) {
  Rng rng(9);
  LanguageModel lm(tiny(), rng);
  ParamRefs ps;
  lm.collect(ps);
  Parameter mol = nn::normal_param("test.hmol", {1, 8}, rng, 0.5);
  ps.push_back(&mol);
  auto f = [&](ag::Tape& t) {
    const LmExample batch[] = {LmExample{tokenize("<bos>C"), {t.param(mol)}, tokenize("CO<eos>")},
                               LmExample{{}, {}, tokenize("N<eos>")}};
    return lm_loss(t, lm, batch);
  };
  EXPECT_LT(ag::finite_diff_check(f, ps).max_rel_error, 1e-4);
}

TEST(Dispatch, ForcedEosGivesEmptyContinuation) {
  Rng rng(10);
  const LanguageModel lm(tiny(), rng);
  GenerateOptions opt;
  opt.logit_hook = [](std::size_t, std::span<double> l) { l[kEos] = 1e9; };
  Rng r(1);
  const Generation g = generate_with_dispatch(lm, tokenize("<bos>hi"), constant_handlers(8), r, opt);
  EXPECT_TRUE(g.ids.empty());
  EXPECT_TRUE(g.text.empty());
  EXPECT_TRUE(g.events.empty());
  EXPECT_FALSE(g.max_len_exceeded);
}

TEST(Dispatch, ForcedGenerateRoutesOnce) {
  Rng rng(11);
  const LanguageModel lm(tiny(), rng);
  GenerateOptions opt;
  std::size_t hidden_rows = 0;
  DispatchHandlers h = constant_handlers(8);
  h.generate = [&](const Tensor& hidden) {
    hidden_rows = hidden.rows();
    return std::string("CC(=O)O");
  };
  opt.logit_hook = [](std::size_t step, std::span<double> l) { l[step == 0 ? kGenerate : kEos] = 1e9; };
  Rng r(1);
  const std::vector<int> prompt = tokenize("<bos>make acid");
  const Generation g = generate_with_dispatch(lm, prompt, h, r, opt);
  ASSERT_EQ(g.events.size(), 1u);
  EXPECT_EQ(g.events[0].token, kGenerate);
  EXPECT_EQ(hidden_rows, prompt.size() + 1);
  EXPECT_EQ(g.text, "<d:generate><mol>CC(=O)O</mol>");
  const auto open = g.text.find("<mol>"), close = g.text.find("</mol>");
  EXPECT_TRUE(chem::check_validity(g.text.substr(open + 5, close - open - 5)));
  // the generated molecule re-enters the context as a structural row
  EXPECT_EQ(g.context.structural_count(), 1u);
}

TEST(Dispatch, ReactAndPerceiveFeedBack) {
  Rng rng(12);
  const LanguageModel lm(tiny(), rng);
  GenerateOptions opt;
  opt.logit_hook = [](std::size_t step, std::span<double> l) {
    const int script[] = {kReact, kPerceive, kEos};
    l[script[std::min<std::size_t>(step, 2)]] = 1e9;
  };
  Rng r(1);
  const Generation g =
      generate_with_dispatch(lm, tokenize("<bos>CCO + acid"), constant_handlers(8), r, opt);
  ASSERT_EQ(g.events.size(), 2u);
  EXPECT_EQ(g.events[0].token, kReact);
  EXPECT_EQ(g.events[0].input, "<bos>CCO + acid<d:react>");
  EXPECT_EQ(g.text, "<d:react><mol>CC(=O)O</mol> yield 75.0<d:perceive>");
  EXPECT_EQ(g.events[1].output, "CC(=O)O");
  // prompt entity, react output, perceive
  EXPECT_EQ(g.context.structural_count(), 3u);
  std::size_t dispatch_tokens = 0;
  for (int id : g.ids) dispatch_tokens += is_dispatch(id);
  EXPECT_EQ(dispatch_tokens, g.events.size());
}

TEST(Dispatch, MaxLenAndDeterminism) {
  Rng rng(13);
  const LanguageModel lm(tiny(), rng);
  GenerateOptions opt;
  opt.max_len = 5;
  opt.temperature = 1.0;
  opt.logit_hook = [](std::size_t, std::span<double> l) {
    l[kEos] = -1e9;
    for (int d : {kGenerate, kReact, kPerceive}) l[d] = -1e9;
  };
  Rng r1(3), r2(3);
  const auto g1 = generate_with_dispatch(lm, tokenize("<bos>"), {}, r1, opt);
  const auto g2 = generate_with_dispatch(lm, tokenize("<bos>"), {}, r2, opt);
  EXPECT_TRUE(g1.max_len_exceeded);
  EXPECT_EQ(g1.ids.size(), 5u);
  EXPECT_EQ(g1.text, g2.text);
  Rng r3(3);
  EXPECT_EQ(error_code([&] { generate_with_dispatch(lm, {}, {}, r3, opt); }), Errc::InvalidRange);
}
