//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/diffusion/autoencoder.hpp"

#include <algorithm>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"

namespace scm::diffusion {

using ag::Tape;
using ag::Var;

SmilesAlphabet::SmilesAlphabet() : chars_("BCNOPSFIHlrbcnops()[]=#-+%0123456789") {}

int SmilesAlphabet::id(char c) const noexcept {
  const auto pos = chars_.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos) + 2;
}

char SmilesAlphabet::symbol(int id) const noexcept {
  if (id < 2 || static_cast<std::size_t>(id) >= size()) return '\0';
  return chars_[static_cast<std::size_t>(id) - 2];
}

SmilesAutoencoder::SmilesAutoencoder(const AutoencoderConfig& config, Rng& rng)
    : config_(config),
      embed_(nn::normal_param("ae.embed", {alphabet_.size(), config.width}, rng, 1.0)),
      to_latent_("ae.to_latent", config.width, config.latent_width, rng),
      from_latent_("ae.from_latent", config.latent_width, config.width, rng),
      dec_norm_("ae.dec_norm", config.width),
      to_chars_("ae.to_chars", config.width, alphabet_.size(), rng) {
  for (std::size_t b = 0; b < config.encoder_blocks; ++b) {
    enc_blocks_.emplace_back("ae.enc" + std::to_string(b), config.width, config.heads,
                             config.mlp_width, false, rng);
  }
  for (std::size_t b = 0; b < config.decoder_blocks; ++b) {
    dec_blocks_.emplace_back("ae.dec" + std::to_string(b), config.width, config.heads,
                             config.mlp_width, false, rng);
  }
}

std::vector<int> SmilesAutoencoder::tokenize(std::string_view smiles) const {
  if (smiles.size() + 1 > config_.length) {
    throw Error(Errc::TooLong, "SMILES of " + std::to_string(smiles.size()) +
                                   " characters exceeds " + std::to_string(config_.length - 1));
  }
  if (!chem::check_validity(smiles)) {
    throw Error(Errc::InvalidSmiles, "'" + std::string(smiles) + "' is not a valid SMILES");
  }
  std::vector<int> ids(config_.length, SmilesAlphabet::kPad);
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    ids[i] = alphabet_.id(smiles[i]);
    if (ids[i] < 0) throw Error(Errc::InvalidSmiles, "character outside the alphabet");
  }
  ids[smiles.size()] = SmilesAlphabet::kEnd;
  return ids;
}

Var SmilesAutoencoder::encode(Tape& tape, std::string_view smiles) const {
  const std::vector<int> ids = tokenize(smiles);
  Var h = ag::embedding(tape.param(embed_), ids);
  h = ag::add(h, tape.constant(nn::sinusoidal(config_.length, config_.width)));
  for (const auto& blk : enc_blocks_) h = blk(tape, h);
  return ag::layer_norm(to_latent_(tape, h));
}

Var SmilesAutoencoder::decode_logits(Tape& tape, Var z) const {
  if (z.rows() != config_.length || z.cols() != config_.latent_width) {
    throw Error(Errc::ShapeMismatch, "latent shape " + shape_string(z.value().shape()));
  }
  Var h = ag::add(from_latent_(tape, z), tape.constant(nn::sinusoidal(config_.length, config_.width)));
  for (const auto& blk : dec_blocks_) h = blk(tape, h);
  return to_chars_(tape, dec_norm_(tape, h));
}

Var SmilesAutoencoder::reconstruction_loss(Tape& tape, std::string_view smiles, Rng& rng,
                                           double noise_std) const {
  const std::vector<int> ids = tokenize(smiles);
  Var z = encode(tape, smiles);
  if (noise_std > 0.0) {
    Tensor noise = Tensor::matrix(config_.length, config_.latent_width);
    for (double& x : noise.values()) x = noise_std * rng.normal();
    z = ag::add(z, tape.constant(std::move(noise)));
  }
  return ag::cross_entropy(decode_logits(tape, z), ids);
}

Tensor SmilesAutoencoder::encode(std::string_view smiles) const {
  Tape tape;
  return encode(tape, smiles).value();
}

std::string SmilesAutoencoder::decode(const Tensor& z) const {
  Tape tape;
  const Tensor logits = decode_logits(tape, tape.constant(z)).value();
  std::string out;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row_span(r);
    const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == SmilesAlphabet::kEnd || best == SmilesAlphabet::kPad) break;
    out += alphabet_.symbol(best);
  }
  return out;
}

void SmilesAutoencoder::collect(ParamRefs& out) {
  out.push_back(&embed_);
  for (auto& b : enc_blocks_) b.collect(out);
  to_latent_.collect(out);
  from_latent_.collect(out);
  for (auto& b : dec_blocks_) b.collect(out);
  dec_norm_.collect(out);
  to_chars_.collect(out);
}

}  // namespace scm::diffusion
