//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scm/core/autograd.hpp"
#include "scm/core/nn.hpp"
#include "scm/core/rng.hpp"
#include "scm/lm/tokenizer.hpp"

namespace scm::lm {

struct LmConfig {
  std::size_t vocab = kVocabSize;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t mlp_width = 256;
  std::size_t blocks = 4;
};

/// Rows of the backbone output. `structural[i]` marks rows that came from a
/// virtual structural token rather than a text token.
struct HiddenStates {
  Tensor rows;
  std::vector<bool> structural;

  std::size_t size() const noexcept { return structural.size(); }
  std::size_t structural_count() const noexcept;
};

/// Concat(H, h_mol_1, ..., h_mol_K) with the new rows flagged. Each h_mol is
/// 1 x d. Throws WidthMismatch.
HiddenStates inject_structural_tokens(const HiddenStates& h, std::span<const Tensor> mols);

/// One input row: a token id, or (token < 0) a 1 x d structural vector.
struct Slot {
  int token = kPad;
  std::optional<ag::Var> structure;
};

/// Decoding context: tokens interleaved with structural rows.
class Context {
 public:
  Context() = default;
  explicit Context(std::span<const int> ids);

  void push(int token);
  void push_structure(Tensor h_mol);
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t structural_count() const noexcept;
  /// Token ids only, in order.
  std::vector<int> tokens() const;
  std::vector<Slot> slots(ag::Tape& tape) const;

 private:
  std::vector<int> tokens_;  // -1 marks a structural row
  std::vector<Tensor> structures_;
};

/// Causal transformer over character tokens. Parameters are "lm.*".
class LanguageModel {
 public:
  LanguageModel() = default;
  LanguageModel(const LmConfig& config, Rng& rng);

  const LmConfig& config() const noexcept { return config_; }

  /// N x d hidden rows after the final norm. Throws VocabOverflow,
  /// WidthMismatch, InvalidRange (empty input).
  ag::Var hidden(ag::Tape& tape, std::span<const Slot> slots) const;
  ag::Var logits(ag::Tape& tape, ag::Var hidden) const;

  HiddenStates encode_text(std::span<const int> ids) const;
  HiddenStates encode(const Context& context) const;
  /// Next-token logits for every row of the context.
  Tensor logits(const Context& context) const;

  void collect(ParamRefs& out);

 private:
  LmConfig config_;
  Parameter embed_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm ln_f_;
  nn::Linear head_;
};

/// Training pair: prompt X, structural rows appended after X, target Y.
/// The model reads [X, structures, Y] and is scored on every Y token; PAD
/// targets are ignored. An empty prompt with no structures reads from BOS.
struct LmExample {
  std::vector<int> prompt;
  std::vector<ag::Var> structures;
  std::vector<int> target;
};

/// Mean next-token NLL over non-PAD target tokens of the batch. Throws
/// EmptyBatch (no examples or no scored tokens).
ag::Var lm_loss(ag::Tape& tape, const LanguageModel& lm, std::span<const LmExample> batch);

/// Routes dispatch tokens to the molecular modules. Unset handlers leave the
/// corresponding event with an empty output.
struct DispatchHandlers {
  /// h_mol (1 x d) for a SMILES string; used for structural injection.
  std::function<Tensor(const std::string& smiles)> perceive;
  /// SMILES from the current hidden states (the caller applies text_proj).
  std::function<std::string(const Tensor& hidden)> generate;
  /// Text fed back after a reaction query, given the decoded context.
  std::function<std::string(const std::string& context)> react;
};

struct DispatchEvent {
  int token = kPad;
  std::size_t step = 0;
  std::string input;
  std::string output;
};

struct GenerateOptions {
  std::size_t max_len = 64;
  /// 0 decodes greedily.
  double temperature = 0.0;
  /// Edits the next-token logits before selection (scripted runs and tests).
  std::function<void(std::size_t step, std::span<double> logits)> logit_hook;
};

struct Generation {
  std::vector<int> ids;  // continuation, including inserted module output
  std::string text;      // detokenized continuation
  std::vector<DispatchEvent> events;
  Context context;       // final context
  bool max_len_exceeded = false;
};

/// Prompt context with a structural row injected after every detected
/// entity (after its closing marker when the entity sits inside <mol>).
Context build_context(std::span<const int> prompt, const DispatchHandlers& handlers);

/// Decodes until EOS or max_len model steps, dispatching on the way.
Generation generate_with_dispatch(const LanguageModel& lm, std::span<const int> prompt,
                                  const DispatchHandlers& handlers, Rng& rng,
                                  const GenerateOptions& options = {});

}  // namespace scm::lm
