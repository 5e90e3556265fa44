//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/rxn/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scm/core/error.hpp"

namespace scm::rxn {

using ag::Tape;
using ag::Var;

namespace {

constexpr std::array<std::string_view, kRoleCount> kRoleNames{"reactant", "reagent", "solvent",
                                                              "catalyst", "product"};
constexpr std::array<std::string_view, kAmountChannels> kChannelNames{
    "moles", "mass", "volume", "concentration", "equivalents"};

Var zero_scalar(Tape& tape) { return tape.constant(Tensor::scalar(0.0)); }

}  // namespace

Role role_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  throw Error(Errc::UnknownRole, "unknown role '" + std::string(name) + "'");
}

std::string_view role_name(Role role) noexcept {
  return kRoleNames[static_cast<std::size_t>(role)];
}

std::string_view amount_channel_name(std::size_t channel) {
  if (channel >= kAmountChannels) {
    throw Error(Errc::IndexOutOfRange, "amount channel " + std::to_string(channel));
  }
  return kChannelNames[channel];
}

void check_record(const ReactionRecord& record) {
  bool reactant = false, product = false;
  for (const auto& m : record.molecules) {
    reactant |= m.role == Role::Reactant;
    product |= m.role == Role::Product;
  }
  if (!reactant || !product) {
    throw Error(Errc::InvalidRange, "reaction needs at least one reactant and one product");
  }
  if (record.yield_percent && !(*record.yield_percent >= 0.0 && *record.yield_percent <= 100.0)) {
    throw Error(Errc::OutOfRange, "yield " + std::to_string(*record.yield_percent) +
                                      " outside [0,100]");
  }
}

Tensor AmountVector::tensor() const { return Tensor::row(v); }

AmountNormalizer::AmountNormalizer() { scale_.fill(1.0); }

AmountNormalizer AmountNormalizer::fit(std::span<const ReactionRecord> corpus) {
  AmountNormalizer n;
  for (std::size_t c = 0; c < kAmountChannels; ++c) {
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (const auto& r : corpus) {
      for (const auto& m : r.molecules) {
        if (!m.amounts.raw[c]) continue;
        sum += *m.amounts.raw[c];
        ++count;
      }
    }
    if (count == 0) continue;
    n.mean_[c] = sum / static_cast<double>(count);
    for (const auto& r : corpus) {
      for (const auto& m : r.molecules) {
        if (m.amounts.raw[c]) sq += (*m.amounts.raw[c] - n.mean_[c]) * (*m.amounts.raw[c] - n.mean_[c]);
      }
    }
    const double sd = std::sqrt(sq / static_cast<double>(count));
    n.scale_[c] = sd > 1e-12 ? sd : 1.0;
  }
  return n;
}

AmountVector AmountNormalizer::apply(const Amounts& amounts) const {
  AmountVector out;
  for (std::size_t c = 0; c < kAmountChannels; ++c) {
    if (!amounts.raw[c]) continue;
    out.v[c] = (*amounts.raw[c] - mean_[c]) / scale_[c];
    out.v[kAmountChannels + c] = 1.0;
  }
  return out;
}

std::size_t bin_yield(double percent, std::size_t bins) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw Error(Errc::OutOfRange, "yield " + std::to_string(percent) + " outside [0,100]");
  }
  const auto b = static_cast<std::size_t>(std::floor(percent * static_cast<double>(bins) / 100.0));
  return std::min(b, bins - 1);
}

PreparedReaction prepare(const ReactionRecord& record, const AmountNormalizer& norm,
                         const GeometryFn& geometry) {
  check_record(record);
  PreparedReaction rx;
  for (const auto& m : record.molecules) {
    rx.smiles.push_back(m.smiles);
    rx.h_geo.push_back(geometry(m.smiles));
    rx.amounts.push_back(norm.apply(m.amounts));
    rx.roles.push_back(m.role);
  }
  if (record.yield_percent) rx.yield = *record.yield_percent / 100.0;
  return rx;
}

ReactionModel::ReactionModel(const ReactionConfig& config, Rng& rng)
    : config_(config),
      f_mol_("rxn.f_mol", config.geo_width, config.width, rng, false),
      f_amt_("rxn.f_amt", kAmountWidth, config.width, rng, false),
      role_embed_(nn::normal_param("rxn.role", {kRoleCount, config.width}, rng, 0.5)),
      type_embed_(nn::normal_param("rxn.type", {2, config.width}, rng, 0.5)),
      cls_(nn::normal_param("rxn.cls", {1, config.width}, rng, 0.5)),
      ln_out_("rxn.ln_out", config.width),
      mol_head_("rxn.mol_head", config.width, config.geo_width, rng),
      amt_head_("rxn.amt_head", config.width, kAmountChannels, rng),
      reg_head_("rxn.reg_head", config.width, 1, rng),
      cls_head_("rxn.cls_head", config.width, config.bins, rng) {
  for (std::size_t b = 0; b < config.blocks; ++b) {
    blocks_.emplace_back("rxn.block" + std::to_string(b), config.width, config.heads,
                         config.mlp_width, false, rng);
  }
}

Var ReactionModel::token(Tape& tape, Var h_geo, Var amounts, int role, TokenType type) const {
  if (role < 0 || role >= static_cast<int>(kRoleCount)) {
    throw Error(Errc::UnknownRole, "role id " + std::to_string(role));
  }
  if (amounts.rows() != 1 || amounts.cols() != kAmountWidth) {
    throw Error(Errc::ShapeMismatch, "amount vector must be 1x10, got " +
                                         shape_string(amounts.value().shape()));
  }
  // value channels are multiplied by their presence flags
  Tensor gate = Tensor::matrix(1, kAmountWidth, 1.0);
  for (std::size_t c = 0; c < kAmountChannels; ++c) gate[c] = amounts.value()[kAmountChannels + c];
  const Var gated = ag::mul(amounts, tape.constant(std::move(gate)));
  const int r_id[] = {role};
  const int t_id[] = {static_cast<int>(type)};
  const Var parts[] = {f_mol_(tape, h_geo), f_amt_(tape, gated),
                       ag::embedding(tape.param(role_embed_), r_id),
                       ag::embedding(tape.param(type_embed_), t_id)};
  return ag::add_n(parts);
}

EncodedReaction ReactionModel::encode(Tape& tape, const PreparedReaction& rx,
                                      std::span<const std::size_t> mask,
                                      std::span<const Var> geometry) const {
  const std::size_t n = rx.size();
  if (n == 0) throw Error(Errc::EmptyBatch, "reaction without molecules");
  if (!geometry.empty() && geometry.size() != n) {
    throw Error(Errc::LengthMismatch, "geometry rows do not match molecule count");
  }
  std::vector<bool> masked(n, false);
  for (std::size_t m : mask) {
    if (m >= n) {
      throw Error(Errc::IndexOutOfRange, "mask index " + std::to_string(m) + " with " +
                                             std::to_string(n) + " molecules");
    }
    masked[m] = true;
  }
  const Tensor zero_geo = Tensor::matrix(1, config_.geo_width);

  // Canonical order by (role, type, geometry, amounts) so the attention sums
  // run in the same order for any permutation of the input.
  std::vector<std::vector<double>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& k = keys[i];
    k.push_back(static_cast<double>(rx.roles[i]));
    k.push_back(masked[i] ? 1.0 : 0.0);
    const Tensor& g = masked[i] ? zero_geo : (geometry.empty() ? rx.h_geo[i] : geometry[i].value());
    k.insert(k.end(), g.values().begin(), g.values().end());
    k.insert(k.end(), rx.amounts[i].v.begin(), rx.amounts[i].v.end());
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<Var> rows{tape.param(cls_)};
  for (std::size_t i : order) {
    Var g = masked[i] ? tape.constant(zero_geo)
                      : (geometry.empty() ? tape.constant(rx.h_geo[i]) : geometry[i]);
    rows.push_back(token(tape, g, tape.constant(rx.amounts[i].tensor()),
                         static_cast<int>(rx.roles[i]),
                         masked[i] ? TokenType::Masked : TokenType::Observed));
  }
  Var x = ag::concat_rows(rows);
  for (const auto& blk : blocks_) x = blk(tape, x);
  x = ln_out_(tape, x);

  std::vector<std::size_t> back(n);
  for (std::size_t k = 0; k < n; ++k) back[order[k]] = k + 1;
  return {ag::gather_rows(x, back), ag::slice_rows(x, 0, 1)};
}

Var ReactionModel::predict_masked(Tape& tape, const EncodedReaction& enc,
                                  std::span<const std::size_t> mask) const {
  if (mask.empty()) throw Error(Errc::EmptyMask, "no masked slot to predict");
  return mol_head_(tape, ag::gather_rows(enc.tokens, mask));
}

Var ReactionModel::predict_amounts(Tape& tape, const EncodedReaction& enc) const {
  return amt_head_(tape, enc.tokens);
}

Var ReactionModel::yield_reg(Tape& tape, Var cls) const {
  return ag::sigmoid(reg_head_(tape, cls));
}

Var ReactionModel::yield_logits(Tape& tape, Var cls) const { return cls_head_(tape, cls); }

YieldPrediction ReactionModel::predict_yield(const Tensor& cls) const {
  Tape tape;
  const Var c = tape.constant(cls);
  YieldPrediction out;
  out.reg = std::clamp(yield_reg(tape, c).item(), 0.0, 1.0);
  const Tensor p = ag::softmax(yield_logits(tape, c)).value();
  out.cls.assign(p.values().begin(), p.values().end());
  return out;
}

std::vector<Tensor> ReactionModel::predict_masked(const PreparedReaction& rx,
                                                  std::span<const std::size_t> mask) const {
  Tape tape;
  const Tensor pred = predict_masked(tape, encode(tape, rx, mask), mask).value();
  std::vector<Tensor> out;
  for (std::size_t r = 0; r < pred.rows(); ++r) out.push_back(Tensor::row(pred.row_span(r)));
  return out;
}

YieldPrediction ReactionModel::predict_yield(const PreparedReaction& rx,
                                             std::span<const std::size_t> mask) const {
  Tape tape;
  return predict_yield(encode(tape, rx, mask).cls.value());
}

void ReactionModel::collect(ParamRefs& out) {
  f_mol_.collect(out);
  f_amt_.collect(out);
  out.push_back(&role_embed_);
  out.push_back(&type_embed_);
  out.push_back(&cls_);
  for (auto& b : blocks_) b.collect(out);
  ln_out_.collect(out);
  mol_head_.collect(out);
  amt_head_.collect(out);
  reg_head_.collect(out);
  cls_head_.collect(out);
}

std::size_t retrieve_index(const Tensor& query, std::span<const LibraryEntry> library) {
  if (library.empty()) throw Error(Errc::EmptyLibrary, "retrieval library is empty");
  auto norm = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const double qn = norm(query.values());
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t i = 0; i < library.size(); ++i) {
    const Tensor& e = library[i].h_geo;
    if (e.size() != query.size()) {
      throw Error(Errc::WidthMismatch, "library entry " + std::to_string(i) + " has width " +
                                           std::to_string(e.size()));
    }
    double dot = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) dot += e[k] * query[k];
    const double en = norm(e.values());
    const double sim = (qn > 0.0 && en > 0.0) ? dot / (qn * en) : 0.0;
    if (sim > best_sim) {
      best_sim = sim;
      best = i;
    }
  }
  return best;
}

std::string retrieve_nearest(const Tensor& query, std::span<const LibraryEntry> library) {
  return library[retrieve_index(query, library)].smiles;
}

Var yield_loss(Var reg, Var logits, double y, const RxnLossWeights& w) {
  const Var diff = ag::add_scalar(reg, -y);
  const int bin[] = {static_cast<int>(bin_yield(100.0 * y, logits.cols()))};
  const Var parts[] = {ag::scale(ag::sum(ag::square(diff)), w.reg),
                       ag::scale(ag::cross_entropy(logits, bin), w.cls)};
  return ag::add_n(parts);
}

RxnLossTerms reaction_loss(Tape& tape, const ReactionModel& model,
                           std::span<const ReactionSample> batch, const RxnLossWeights& weights,
                           Rng& rng, double amount_hide) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "reaction_loss on an empty batch");
  std::vector<Var> emb_pred, emb_true, amt_terms, yield_terms;
  std::size_t amt_count = 0;
  for (const ReactionSample& s : batch) {
    PreparedReaction rx = s.rx;
    // hide amount channels from the input; they become reconstruction targets
    Tensor target = Tensor::matrix(rx.size(), kAmountChannels);
    Tensor select = Tensor::matrix(rx.size(), kAmountChannels);
    std::size_t hidden = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
      for (std::size_t c = 0; c < kAmountChannels; ++c) {
        if (rx.amounts[i].v[kAmountChannels + c] == 0.0 || !rng.bernoulli(amount_hide)) continue;
        target(i, c) = rx.amounts[i].v[c];
        select(i, c) = 1.0;
        rx.amounts[i].v[c] = 0.0;
        rx.amounts[i].v[kAmountChannels + c] = 0.0;
        ++hidden;
      }
    }
    const EncodedReaction enc = model.encode(tape, rx, s.mask);
    if (!s.mask.empty()) {
      emb_pred.push_back(model.predict_masked(tape, enc, s.mask));
      std::vector<Var> truth;
      for (std::size_t m : s.mask) truth.push_back(tape.constant(s.rx.h_geo[m]));
      emb_true.push_back(ag::concat_rows(truth));
    }
    if (hidden > 0) {
      const Var err = ag::mul(ag::sub(model.predict_amounts(tape, enc), tape.constant(target)),
                              tape.constant(select));
      amt_terms.push_back(ag::sum(ag::square(err)));
      amt_count += hidden;
    }
    if (rx.yield) {
      yield_terms.push_back(yield_loss(model.yield_reg(tape, enc.cls),
                                       model.yield_logits(tape, enc.cls), *rx.yield, weights));
    }
  }
  RxnLossTerms out;
  out.emb = emb_pred.empty()
                ? zero_scalar(tape)
                : ag::mse(ag::concat_rows(emb_pred), ag::concat_rows(emb_true));
  out.amt = amt_terms.empty() ? zero_scalar(tape)
                              : ag::scale(ag::add_n(amt_terms), 1.0 / static_cast<double>(amt_count));
  out.yield = yield_terms.empty()
                  ? zero_scalar(tape)
                  : ag::scale(ag::add_n(yield_terms), 1.0 / static_cast<double>(yield_terms.size()));
  const Var parts[] = {ag::scale(out.emb, weights.emb), ag::scale(out.amt, weights.amt),
                       ag::scale(out.yield, weights.yield)};
  out.total = ag::add_n(parts);
  return out;
}

}  // namespace scm::rxn
