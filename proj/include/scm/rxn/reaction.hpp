//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scm/core/autograd.hpp"
#include "scm/core/nn.hpp"
#include "scm/core/rng.hpp"

namespace scm::rxn {

enum class Role { Reactant = 0, Reagent, Solvent, Catalyst, Product };
inline constexpr std::size_t kRoleCount = 5;

/// Throws UnknownRole.
Role role_from_name(std::string_view name);
std::string_view role_name(Role role) noexcept;

enum class TokenType { Observed = 0, Masked = 1 };

/// moles, mass, volume, concentration, equivalents
inline constexpr std::size_t kAmountChannels = 5;
inline constexpr std::size_t kAmountWidth = 2 * kAmountChannels;
std::string_view amount_channel_name(std::size_t channel);

struct Amounts {
  std::array<std::optional<double>, kAmountChannels> raw{};
};

struct ReactionMolecule {
  std::string smiles;
  Role role = Role::Reactant;
  Amounts amounts;
};

struct ReactionRecord {
  std::vector<ReactionMolecule> molecules;
  std::optional<double> yield_percent;
};

/// Requires a reactant and a product (InvalidRange) and a yield in [0,100]
/// (OutOfRange).
void check_record(const ReactionRecord& record);

/// Values in [0, 5), presence flags in [5, 10). Values are zero where the
/// flag is zero.
struct AmountVector {
  std::array<double, kAmountWidth> v{};

  Tensor tensor() const;
};

/// Per-channel z-normalisation fitted on a corpus. Channels never seen keep
/// mean 0 and scale 1.
class AmountNormalizer {
 public:
  AmountNormalizer();
  static AmountNormalizer fit(std::span<const ReactionRecord> corpus);

  AmountVector apply(const Amounts& amounts) const;
  double mean(std::size_t c) const { return mean_[c]; }
  double scale(std::size_t c) const { return scale_[c]; }

 private:
  std::array<double, kAmountChannels> mean_{};
  std::array<double, kAmountChannels> scale_{};
};

inline constexpr std::size_t kYieldBins = 10;

/// floor(y * bins / 100), y = 100 in the last bin. Throws OutOfRange.
std::size_t bin_yield(double percent, std::size_t bins = kYieldBins);

/// Model-ready reaction: geometry, normalised amounts, roles, yield in [0,1].
struct PreparedReaction {
  std::vector<std::string> smiles;
  std::vector<Tensor> h_geo;  // 1 x d_geo each
  std::vector<AmountVector> amounts;
  std::vector<Role> roles;
  std::optional<double> yield;

  std::size_t size() const noexcept { return roles.size(); }
};

using GeometryFn = std::function<Tensor(const std::string& smiles)>;

PreparedReaction prepare(const ReactionRecord& record, const AmountNormalizer& norm,
                         const GeometryFn& geometry);

struct ReactionConfig {
  std::size_t geo_width = 32;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t mlp_width = 128;
  std::size_t blocks = 2;
  std::size_t bins = kYieldBins;
};

struct YieldPrediction {
  double reg = 0.5;          // [0,1]
  std::vector<double> cls;   // bin probabilities
  double percent() const noexcept { return 100.0 * reg; }
};

/// Per-molecule rows (input order) and the CLS row.
struct EncodedReaction {
  ag::Var tokens;
  ag::Var cls;
};

/// Set encoder over reaction tokens with a learned CLS row. Parameters are
/// "rxn.*".
class ReactionModel {
 public:
  ReactionModel() = default;
  ReactionModel(const ReactionConfig& config, Rng& rng);

  const ReactionConfig& config() const noexcept { return config_; }

  /// r = f_mol(h_geo) + f_amt(a) + e_role + e_type. `amounts` is 1 x 10;
  /// value channels are gated by their flags. Throws UnknownRole.
  ag::Var token(ag::Tape& tape, ag::Var h_geo, ag::Var amounts, int role, TokenType type) const;

  /// Masked molecules get zero geometry and the masked type. `geometry`
  /// optionally replaces the stored h_geo rows (for gradients into the
  /// encoder). Throws IndexOutOfRange.
  EncodedReaction encode(ag::Tape& tape, const PreparedReaction& rx,
                         std::span<const std::size_t> mask,
                         std::span<const ag::Var> geometry = {}) const;

  /// d_geo-wide prediction for each masked slot, in mask order. Throws EmptyMask.
  ag::Var predict_masked(ag::Tape& tape, const EncodedReaction& enc,
                         std::span<const std::size_t> mask) const;
  /// Reconstructed amount values (n x 5).
  ag::Var predict_amounts(ag::Tape& tape, const EncodedReaction& enc) const;
  /// 1 x 1 regression in [0,1] and 1 x B logits.
  ag::Var yield_reg(ag::Tape& tape, ag::Var cls) const;
  ag::Var yield_logits(ag::Tape& tape, ag::Var cls) const;

  YieldPrediction predict_yield(const Tensor& cls) const;
  std::vector<Tensor> predict_masked(const PreparedReaction& rx,
                                     std::span<const std::size_t> mask) const;
  YieldPrediction predict_yield(const PreparedReaction& rx,
                                std::span<const std::size_t> mask = {}) const;

  void collect(ParamRefs& out);

 private:
  ReactionConfig config_;
  nn::Linear f_mol_, f_amt_;
  Parameter role_embed_, type_embed_, cls_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm ln_out_;
  nn::Linear mol_head_, amt_head_, reg_head_, cls_head_;
};

struct LibraryEntry {
  std::string smiles;
  Tensor h_geo;
};
/// Cosine argmax; ties go to the lowest index. Throws EmptyLibrary.
std::size_t retrieve_index(const Tensor& query, std::span<const LibraryEntry> library);
std::string retrieve_nearest(const Tensor& query, std::span<const LibraryEntry> library);

struct RxnLossWeights {
  double emb = 1.0;
  double amt = 1.0;
  double yield = 1.0;
  double reg = 1.0;
  double cls = 0.1;
};

struct ReactionSample {
  PreparedReaction rx;
  std::vector<std::size_t> mask;
};

struct RxnLossTerms {
  ag::Var total, emb, amt, yield;
};

/// lambda_reg (reg - y)^2 + lambda_cls CE(logits, bin(y)) with y in [0,1].
ag::Var yield_loss(ag::Var reg, ag::Var logits, double y, const RxnLossWeights& w);

/// Batch loss. Each present amount channel is hidden from the input with
/// probability `amount_hide` and becomes a reconstruction target. Terms with
/// no contributing sample are exactly zero. Throws EmptyBatch.
RxnLossTerms reaction_loss(ag::Tape& tape, const ReactionModel& model,
                           std::span<const ReactionSample> batch, const RxnLossWeights& weights,
                           Rng& rng, double amount_hide = 0.15);

/// Toy corpus whose yield is a clamped linear function of the amounts:
/// y = clamp(10 + 30 moles(A) + 15 equivalents(B) - 2 volume(solvent), 0, 100).
/// Reactant identities are drawn from a small fixed pool.
std::vector<ReactionRecord> synthetic_linear_yield(std::size_t count, Rng& rng);

}  // namespace scm::rxn
