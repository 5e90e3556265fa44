//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scm/harness/corpus.hpp"
#include "scm/train/losses.hpp"

namespace scm::train {

enum class StageId { Pretrain, Align, Joint, Finetune };

/// "1-pretrain", "1-align", "2-joint", "3-finetune". Throws ConfigError.
StageId stage_from_name(std::string_view name);
std::string_view stage_name(StageId id) noexcept;

struct OptimizerSettings {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;
  /// Cosine decay from lr to 0 over the stage.
  bool cosine = true;
};

struct StageConfig {
  StageId id = StageId::Joint;
  /// Parameter-name prefixes held fixed (the stage adds its implied ones).
  std::vector<std::string> freeze;
  LossWeights weights;
  OptimizerSettings optimizer;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  std::size_t batch = 8;
  double kl_weight = 0.1;
  double temperature = 0.07;
  /// Latent noise of autoencoder pretraining.
  double ae_noise = 0.3;
  /// Corpus files; empty paths are absent corpora.
  std::filesystem::path pairs;
  std::filesystem::path smiles;
  std::filesystem::path reactions;
  /// Optional checkpoint restored before training.
  std::filesystem::path init;
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
};

/// Sections [stage], [freeze], [weights], [optimizer] with "key = value"
/// lines and '#' comments. Relative paths resolve against `base`. Errors are
/// LineError(ConfigError).
StageConfig parse_stage_config(std::string_view text, const std::filesystem::path& base = {});
StageConfig load_stage_config(const std::filesystem::path& path);

/// Configured prefixes plus those the stage implies: 1-align keeps all but
/// "gvp." fixed, stages 2 and 3 keep "ae." fixed.
std::vector<std::string> effective_freeze(const StageConfig& config);

struct StageCorpora {
  std::vector<harness::TextPair> pairs;
  std::vector<std::string> smiles;
  std::vector<rxn::ReactionRecord> reactions;
};

/// Loads every corpus named by the config. Throws LineError(CorpusParseError).
StageCorpora load_stage_corpora(const StageConfig& config);

struct MetricRow {
  std::size_t step = 0;
  std::string task;
  double loss = 0.0;
};

struct StageResult {
  std::vector<MetricRow> metrics;
  std::size_t trainable = 0;
  std::size_t frozen = 0;
};

/// Adam over the unfrozen parameters for config.steps steps.
///   1-pretrain: one task per step in turn (autoencoder reconstruction, lm
///     with lambda_KL KL to a snapshot of the backbone, reaction).
///   1-align: NT-Xent on the pair corpus.
///   2-joint / 3-finetune: joint_loss on batches filled round-robin over
///     the task types with data.
/// Writes the checkpoint and metrics CSV when paths are set. Throws
/// FrozenAllParams, EmptyBatch (no usable corpus).
StageResult run_stage(const StageConfig& config, Models& models, const StageCorpora& corpora);

/// "step,task,loss" CSV.
void write_metrics(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

/// Prompt "<bos><mol>S</mol>", one structural row, target "description<eos>".
LmItem caption_item(const harness::TextPair& pair);

}  // namespace scm::train
