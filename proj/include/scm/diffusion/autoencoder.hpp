//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "scm/core/autograd.hpp"
#include "scm/core/nn.hpp"
#include "scm/core/rng.hpp"

namespace scm::diffusion {

struct AutoencoderConfig {
  std::size_t length = 16;  // latent rows L; text holds at most L - 1 characters
  std::size_t latent_width = 8;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t mlp_width = 128;
  std::size_t encoder_blocks = 1;
  std::size_t decoder_blocks = 2;
};

/// Character vocabulary of the autoencoder: PAD, END, then SMILES characters.
class SmilesAlphabet {
 public:
  static constexpr int kPad = 0;
  static constexpr int kEnd = 1;

  SmilesAlphabet();
  std::size_t size() const noexcept { return chars_.size() + 2; }
  /// -1 for characters outside the alphabet.
  int id(char c) const noexcept;
  char symbol(int id) const noexcept;

 private:
  std::string chars_;
};

/// Frozen SMILES autoencoder: a row-normalized L x d_z latent per string.
class SmilesAutoencoder {
 public:
  SmilesAutoencoder() = default;
  SmilesAutoencoder(const AutoencoderConfig& config, Rng& rng);

  const AutoencoderConfig& config() const noexcept { return config_; }
  const SmilesAlphabet& alphabet() const noexcept { return alphabet_; }

  /// Token ids: characters, END, then PAD up to L. Throws TooLong /
  /// InvalidSmiles.
  std::vector<int> tokenize(std::string_view smiles) const;

  ag::Var encode(ag::Tape& tape, std::string_view smiles) const;
  ag::Var decode_logits(ag::Tape& tape, ag::Var z) const;
  /// Reconstruction cross-entropy with Gaussian noise of `noise_std` added
  /// to the latent.
  ag::Var reconstruction_loss(ag::Tape& tape, std::string_view smiles, Rng& rng,
                              double noise_std) const;

  Tensor encode(std::string_view smiles) const;
  /// Greedy characters up to the first END or PAD.
  std::string decode(const Tensor& z) const;

  void collect(ParamRefs& out);

 private:
  AutoencoderConfig config_;
  SmilesAlphabet alphabet_;
  Parameter embed_;
  std::vector<nn::TransformerBlock> enc_blocks_;
  nn::Linear to_latent_;
  nn::Linear from_latent_;
  std::vector<nn::TransformerBlock> dec_blocks_;
  nn::LayerNorm dec_norm_;
  nn::Linear to_chars_;
};

}  // namespace scm::diffusion
