//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/lm/model.hpp"

#include <algorithm>
#include <cmath>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"

namespace scm::lm {

using ag::Tape;
using ag::Var;

std::size_t HiddenStates::structural_count() const noexcept {
  return static_cast<std::size_t>(std::count(structural.begin(), structural.end(), true));
}

HiddenStates inject_structural_tokens(const HiddenStates& h, std::span<const Tensor> mols) {
  if (mols.empty()) return h;
  const std::size_t d = h.rows.cols();
  for (const Tensor& m : mols) {
    if (m.rows() != 1 || m.cols() != d) {
      throw Error(Errc::WidthMismatch, "structural token " + shape_string(m.shape()) +
                                           " does not match hidden width " + std::to_string(d));
    }
  }
  HiddenStates out;
  out.rows = Tensor::matrix(h.size() + mols.size(), d);
  std::copy(h.rows.values().begin(), h.rows.values().end(), out.rows.values().begin());
  for (std::size_t k = 0; k < mols.size(); ++k) {
    std::copy(mols[k].values().begin(), mols[k].values().end(),
              out.rows.values().begin() + static_cast<std::ptrdiff_t>((h.size() + k) * d));
  }
  out.structural = h.structural;
  out.structural.resize(h.size() + mols.size(), true);
  return out;
}

Context::Context(std::span<const int> ids) : tokens_(ids.begin(), ids.end()) {}

void Context::push(int token) { tokens_.push_back(token); }

void Context::push_structure(Tensor h_mol) {
  tokens_.push_back(-1);
  structures_.push_back(std::move(h_mol));
}

std::size_t Context::structural_count() const noexcept { return structures_.size(); }

std::vector<int> Context::tokens() const {
  std::vector<int> out;
  for (int t : tokens_) {
    if (t >= 0) out.push_back(t);
  }
  return out;
}

std::vector<Slot> Context::slots(Tape& tape) const {
  std::vector<Slot> out;
  out.reserve(tokens_.size());
  std::size_t k = 0;
  for (int t : tokens_) {
    Slot s;
    s.token = t;
    if (t < 0) s.structure = tape.constant(structures_[k++]);
    out.push_back(std::move(s));
  }
  return out;
}

LanguageModel::LanguageModel(const LmConfig& config, Rng& rng)
    : config_(config),
      embed_(nn::normal_param("lm.embed", {config.vocab, config.width}, rng, 0.1)),
      ln_f_("lm.ln_f", config.width),
      head_("lm.head", config.width, config.vocab, rng) {
  for (std::size_t b = 0; b < config.blocks; ++b) {
    blocks_.emplace_back("lm.block" + std::to_string(b), config.width, config.heads,
                         config.mlp_width, true, rng);
  }
}

Var LanguageModel::hidden(Tape& tape, std::span<const Slot> slots) const {
  if (slots.empty()) throw Error(Errc::InvalidRange, "empty token sequence");
  const std::size_t d = config_.width;
  std::vector<int> ids;
  for (const Slot& s : slots) {
    if (s.token >= static_cast<int>(config_.vocab)) {
      throw Error(Errc::VocabOverflow, "token " + std::to_string(s.token) +
                                           " outside vocabulary of " +
                                           std::to_string(config_.vocab));
    }
    if (s.token < 0) {
      if (!s.structure || s.structure->rows() != 1 || s.structure->cols() != d) {
        throw Error(Errc::WidthMismatch, "structural slot needs a 1x" + std::to_string(d) + " row");
      }
    } else {
      ids.push_back(s.token);
    }
  }
  Var table = tape.param(embed_);
  Var x;
  if (ids.size() == slots.size()) {
    x = ag::embedding(table, ids);
  } else {
    // Runs of token rows are embedded together; structural rows are spliced in.
    std::vector<Var> parts;
    std::vector<int> run;
    auto flush = [&] {
      if (!run.empty()) parts.push_back(ag::embedding(table, run));
      run.clear();
    };
    for (const Slot& s : slots) {
      if (s.token >= 0) {
        run.push_back(s.token);
      } else {
        flush();
        parts.push_back(*s.structure);
      }
    }
    flush();
    x = ag::concat_rows(parts);
  }
  x = ag::add(x, tape.constant(nn::sinusoidal(slots.size(), d)));
  for (const auto& blk : blocks_) x = blk(tape, x);
  return ln_f_(tape, x);
}

Var LanguageModel::logits(Tape& tape, Var hidden) const { return head_(tape, hidden); }

HiddenStates LanguageModel::encode(const Context& context) const {
  Tape tape;
  const std::vector<Slot> slots = context.slots(tape);
  HiddenStates out;
  out.rows = hidden(tape, slots).value();
  for (const Slot& s : slots) out.structural.push_back(s.token < 0);
  return out;
}

HiddenStates LanguageModel::encode_text(std::span<const int> ids) const {
  return encode(Context(ids));
}

Tensor LanguageModel::logits(const Context& context) const {
  Tape tape;
  return logits(tape, hidden(tape, context.slots(tape))).value();
}

void LanguageModel::collect(ParamRefs& out) {
  out.push_back(&embed_);
  for (auto& b : blocks_) b.collect(out);
  ln_f_.collect(out);
  head_.collect(out);
}

Var lm_loss(Tape& tape, const LanguageModel& lm, std::span<const LmExample> batch) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "lm_loss on an empty batch");
  std::vector<Var> rows;
  std::vector<int> targets;
  for (const LmExample& ex : batch) {
    if (ex.target.empty()) continue;
    std::vector<Slot> slots;
    for (int t : ex.prompt) slots.push_back({t, std::nullopt});
    for (const Var& s : ex.structures) slots.push_back({-1, s});
    if (slots.empty()) slots.push_back({kBos, std::nullopt});
    const std::size_t first = slots.size() - 1;
    for (std::size_t i = 0; i + 1 < ex.target.size(); ++i) slots.push_back({ex.target[i], std::nullopt});
    Var logits = lm.logits(tape, lm.hidden(tape, slots));
    rows.push_back(ag::slice_rows(logits, first, ex.target.size()));
    targets.insert(targets.end(), ex.target.begin(), ex.target.end());
  }
  if (std::all_of(targets.begin(), targets.end(), [](int t) { return t == kPad; })) {
    throw Error(Errc::EmptyBatch, "lm_loss batch has no scored tokens");
  }
  Var all = rows.size() == 1 ? rows.front() : ag::concat_rows(rows);
  return ag::cross_entropy(all, targets, kPad);
}

namespace {

// Appends a structural row for `smiles` when it is a valid molecule and a
// perception handler is present. Returns true if a row was added.
bool inject(Context& ctx, const std::string& smiles, const DispatchHandlers& handlers) {
  if (!handlers.perceive || !chem::check_validity(smiles)) return false;
  ctx.push_structure(handlers.perceive(smiles));
  return true;
}

// Content of the <mol> ... </mol> pair closed by the last token, if any.
std::optional<std::string> closed_molecule(const std::vector<int>& ids) {
  if (ids.empty() || ids.back() != kMolClose) return std::nullopt;
  for (std::size_t i = ids.size() - 1; i-- > 0;) {
    if (ids[i] == kMolOpen) {
      return plain_text(std::span<const int>(ids).subspan(i + 1, ids.size() - i - 2));
    }
    if (!is_char_token(ids[i])) return std::nullopt;
  }
  return std::nullopt;
}

int pick(std::span<const double> logits, double temperature, Rng& rng) {
  if (temperature <= 0.0) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] = std::exp((logits[i] - mx) / temperature);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if ((u -= p[i]) <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

}  // namespace

Context build_context(std::span<const int> prompt, const DispatchHandlers& handlers) {
  Context ctx;
  std::size_t i = 0;
  while (i < prompt.size()) {
    if (!is_char_token(prompt[i])) {
      ctx.push(prompt[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < prompt.size() && is_char_token(prompt[j])) ++j;
    const std::string text = plain_text(prompt.subspan(i, j - i));
    const bool closed = j < prompt.size() && prompt[j] == kMolClose;
    std::size_t pos = 0;
    for (const Span& s : detect_entities(text)) {
      for (; pos < s.end(); ++pos) ctx.push(prompt[i + pos]);
      const std::string smiles = text.substr(s.begin, s.length);
      if (closed && s.end() == text.size()) {
        // inside <mol>: the row goes after the closing marker
        ctx.push(kMolClose);
        ++j;
      }
      inject(ctx, smiles, handlers);
    }
    for (; i + pos < j && is_char_token(prompt[i + pos]); ++pos) ctx.push(prompt[i + pos]);
    i = j;
  }
  return ctx;
}

Generation generate_with_dispatch(const LanguageModel& lm, std::span<const int> prompt,
                                  const DispatchHandlers& handlers, Rng& rng,
                                  const GenerateOptions& options) {
  if (prompt.empty()) throw Error(Errc::InvalidRange, "empty prompt");
  Generation gen;
  gen.context = build_context(prompt, handlers);
  std::vector<int> all(prompt.begin(), prompt.end());

  auto append = [&](int id) {
    gen.context.push(id);
    gen.ids.push_back(id);
    all.push_back(id);
    if (auto mol = closed_molecule(all)) inject(gen.context, *mol, handlers);
  };

  std::size_t step = 0;
  for (;; ++step) {
    if (step == options.max_len) {
      gen.max_len_exceeded = true;
      break;
    }
    Tensor logits = lm.logits(gen.context);
    std::span<double> last(logits.storage().data() + (logits.rows() - 1) * logits.cols(),
                           logits.cols());
    if (options.logit_hook) options.logit_hook(step, last);
    const int tok = pick(last, options.temperature, rng);
    if (tok == kEos) break;
    append(tok);
    if (!is_dispatch(tok)) continue;

    DispatchEvent ev;
    ev.token = tok;
    ev.step = step;
    if (tok == kGenerate) {
      if (handlers.generate) {
        ev.output = handlers.generate(lm.encode(gen.context).rows);
        append(kMolOpen);
        for (int id : tokenize(ev.output)) {
          if (is_char_token(id)) append(id);
        }
        append(kMolClose);
      }
    } else if (tok == kReact) {
      ev.input = detokenize(all);
      if (handlers.react) {
        ev.output = handlers.react(ev.input);
        for (int id : tokenize(ev.output)) append(id);
      }
    } else {
      const std::string text = plain_text(all);
      const std::vector<Span> found = detect_entities(text);
      if (!found.empty()) {
        ev.input = text.substr(found.back().begin, found.back().length);
        if (inject(gen.context, ev.input, handlers)) ev.output = ev.input;
      }
    }
    gen.events.push_back(std::move(ev));
  }
  gen.text = detokenize(gen.ids);
  return gen;
}

}  // namespace scm::lm
