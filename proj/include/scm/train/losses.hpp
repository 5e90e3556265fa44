//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scm/chem/conformer.hpp"
#include "scm/core/autograd.hpp"
#include "scm/diffusion/diffusion.hpp"
#include "scm/gvp/gvp.hpp"
#include "scm/lm/model.hpp"
#include "scm/rxn/reaction.hpp"

namespace scm::train {

/// Every coefficient of the joint objective. All must be >= 0.
struct LossWeights {
  double lm = 1.0;
  double align = 1.0;
  double diff = 1.0;
  double rxn = 1.0;
  double emb = 1.0;
  double amt = 1.0;
  double yield = 1.0;
  double reg = 1.0;
  double cls = 1.0;

  /// Throws ConfigError on a negative or non-finite entry.
  void validate() const;
  rxn::RxnLossWeights reaction() const;
};

/// Mean over rows of sum_k p (log p - log q) with p = softmax(logits) and
/// q = softmax(reference). The reference carries no gradient. Throws
/// ShapeMismatch.
ag::Var kl_regularizer(ag::Var logits, const Tensor& reference);

/// Symmetric NT-Xent over cosine similarities: the mean of the
/// molecule-to-text and text-to-molecule cross-entropies with in-batch
/// negatives. Throws EmptyBatch, LengthMismatch, InvalidRange (tau <= 0).
ag::Var ntxent_alignment_loss(ag::Var mol, ag::Var text, double tau = 0.07);
/// Same over lists of 1 x d rows.
ag::Var ntxent_alignment_loss(std::span<const ag::Var> mols, std::span<const ag::Var> texts,
                              double tau = 0.07);

enum class TaskType { Lm, Align, Diffusion, Reaction };

/// "lm", "align", "diffusion", "reaction". Throws UnknownTaskType.
TaskType task_from_name(std::string_view name);
std::string_view task_name(TaskType task) noexcept;

/// Text generation conditioned on molecules: the structural token of each
/// SMILES in `molecules` follows the prompt.
struct LmItem {
  std::vector<int> prompt;
  std::vector<std::string> molecules;
  std::vector<int> target;
};

struct AlignItem {
  std::string smiles;
  std::string description;
  /// Precomputed text embedding, used in place of the backbone when set.
  std::optional<Tensor> text;
};

/// Denoising on the latent of `smiles`. A description conditions the
/// denoiser through text_proj of its backbone rows; without one the null
/// condition is used.
struct DiffusionTextItem {
  std::string smiles;
  std::optional<std::string> description;
};

using TaskPayload = std::variant<LmItem, AlignItem, DiffusionTextItem, rxn::ReactionSample>;

/// A batch element tagged with its task name.
struct JointItem {
  std::string task;
  TaskPayload payload;
};

/// Sizes of the desk system.
struct ModelConfig {
  gvp::GvpConfig gvp;
  lm::LmConfig lm;
  diffusion::AutoencoderConfig autoencoder;
  diffusion::DenoiserConfig denoiser;
  std::size_t diffusion_steps = 50;
  rxn::ReactionConfig reaction;
};

/// All trainable modules. Parameter prefixes: "gvp.", "lm.", "ae.", "dit.",
/// "rxn.".
struct Models {
  Models() = default;
  Models(const ModelConfig& config, Rng& rng);

  ModelConfig config;
  gvp::GvpEncoder gvp;
  lm::LanguageModel lm;
  diffusion::SmilesAutoencoder autoencoder;
  diffusion::Denoiser denoiser;
  diffusion::NoiseSchedule schedule;
  rxn::ReactionModel reaction;

  ParamRefs params();
};

/// Parsed graphs and their default conformers, shared across steps.
class MoleculeCache {
 public:
  const chem::MolecularGraph& graph(const std::string& smiles);
  const chem::Conformer& conformer(const std::string& smiles);

 private:
  std::map<std::string, chem::MolecularGraph> graphs_;
  std::map<std::string, chem::Conformer> conformers_;
};

/// h_mol of a SMILES on the tape (gradients reach the encoder and adapter).
ag::Var molecule_embedding(ag::Tape& tape, const gvp::GvpEncoder& encoder, MoleculeCache& cache,
                           const std::string& smiles);
/// Mean of the backbone rows over the description tokens (1 x d).
ag::Var text_embedding(ag::Tape& tape, const lm::LanguageModel& lm, std::string_view text);

/// Per-task losses of one joint step; absent tasks are nullopt.
struct JointTerms {
  ag::Var total;
  std::optional<ag::Var> lm, align, diffusion, reaction;
};

/// sum over present task types of lambda_task * L_task, each term computed
/// once over its sub-batch. Absent types are not evaluated. An empty batch
/// gives an exact constant 0. Throws UnknownTaskType, including for a tag
/// that does not match its payload. `tau` is the alignment temperature.
JointTerms joint_loss(ag::Tape& tape, Models& models, std::span<const JointItem> batch,
                      const LossWeights& weights, MoleculeCache& cache, Rng& rng,
                      double tau = 0.07);

}  // namespace scm::train
