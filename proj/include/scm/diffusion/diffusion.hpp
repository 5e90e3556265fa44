//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scm/core/autograd.hpp"
#include "scm/core/nn.hpp"
#include "scm/core/rng.hpp"
#include "scm/diffusion/autoencoder.hpp"
#include "scm/diffusion/schedule.hpp"

namespace scm::diffusion {

/// A condition vector c (1 x d_c); nullopt is the null condition.
using Condition = std::optional<Tensor>;

struct DenoiserConfig {
  std::size_t length = 16;
  std::size_t latent_width = 8;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t mlp_width = 128;
  std::size_t blocks = 2;
  std::size_t cond_width = 32;
  /// Width of the language-model hidden states fed to text_proj.
  std::size_t text_width = 64;
};

/// Transformer noise predictor over latent rows. Timestep and condition
/// embeddings are summed into one additive token broadcast to every row; a
/// present condition also adds a separate projection to each row.
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(const DenoiserConfig& config, Rng& rng);

  const DenoiserConfig& config() const noexcept { return config_; }

  /// `c` is a 1 x d_c row on the tape, or nullopt for the null branch.
  ag::Var predict(ag::Tape& tape, ag::Var z_t, std::size_t t, std::optional<ag::Var> c) const;
  Tensor predict(const Tensor& z_t, std::size_t t, const Condition& c) const;

  /// c = TextProj(mean of hidden rows).
  ag::Var text_proj(ag::Tape& tape, ag::Var hidden) const;
  Tensor text_proj(const Tensor& hidden) const;

  void collect(ParamRefs& out);

 private:
  DenoiserConfig config_;
  nn::Linear in_proj_;
  nn::Linear time1_, time2_;
  nn::Linear cond_proj_;
  nn::Linear cond_rows_;
  Parameter null_cond_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm out_norm_;
  nn::Linear out_proj_;
  nn::Linear text_proj_;
};

struct GuidanceConfig {
  double scale = 1.0;
  /// Sampler steps; 0 uses every step of the schedule.
  std::size_t steps = 0;
};

struct SampleRequest {
  Condition condition;
  GuidanceConfig guidance;
  std::optional<std::string> source;
  /// Start step for bridge editing (0 picks T / 2).
  std::size_t bridge_t = 0;
};

/// sqrt(alpha_bar_t) Enc(x_src) + sqrt(1 - alpha_bar_t) eps. Throws
/// InvalidSmiles.
Tensor bridge_init(const std::string& source, std::size_t t, const Tensor& eps,
                   const NoiseSchedule& schedule, const SmilesAutoencoder& ae);

/// Ancestral sampling with posterior variance and classifier-free guidance,
/// then greedy decoding. The returned latent is z_0.
struct SampleResult {
  std::string smiles;
  Tensor latent;
};
SampleResult sample_latent(const SampleRequest& request, const NoiseSchedule& schedule,
                           const Denoiser& denoiser, const SmilesAutoencoder& ae, Rng& rng);
std::string sample(const SampleRequest& request, const NoiseSchedule& schedule,
                   const Denoiser& denoiser, const SmilesAutoencoder& ae, Rng& rng);

struct DiffusionItem {
  std::string smiles;
  Condition condition;
};

/// Noise-prediction MSE on one latent: t uniform in 1..T, eps ~ N(0, I), and
/// with probability `null_prob` the condition is replaced by the null one.
/// `z0` is a constant (the autoencoder stays outside the tape).
ag::Var noise_loss(ag::Tape& tape, const Tensor& z0, std::optional<ag::Var> c,
                   const NoiseSchedule& schedule, const Denoiser& denoiser, Rng& rng,
                   double null_prob = 0.1);

/// Mean of noise_loss over the batch. Throws EmptyBatch.
ag::Var diffusion_loss(ag::Tape& tape, const std::vector<DiffusionItem>& batch,
                       const NoiseSchedule& schedule, const Denoiser& denoiser,
                       const SmilesAutoencoder& ae, Rng& rng, double null_prob = 0.1);

}  // namespace scm::diffusion
