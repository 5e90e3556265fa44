//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/train/losses.hpp"

#include <cmath>
#include <numeric>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"
#include "scm/lm/tokenizer.hpp"

namespace scm::train {

using ag::Tape;
using ag::Var;

void LossWeights::validate() const {
  const std::pair<const char*, double> all[] = {{"lm", lm},       {"align", align},
                                                {"diff", diff},   {"rxn", rxn},
                                                {"emb", emb},     {"amt", amt},
                                                {"yield", yield}, {"reg", reg},
                                                {"cls", cls}};
  for (const auto& [name, v] : all) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(Errc::ConfigError, std::string("loss weight ") + name + " must be >= 0");
    }
  }
}

rxn::RxnLossWeights LossWeights::reaction() const {
  rxn::RxnLossWeights w;
  w.emb = emb;
  w.amt = amt;
  w.yield = yield;
  w.reg = reg;
  w.cls = cls;
  return w;
}

Var kl_regularizer(Var logits, const Tensor& reference) {
  if (logits.value().shape() != reference.shape()) {
    throw Error(Errc::ShapeMismatch, "kl_regularizer: " + shape_string(logits.value().shape()) +
                                         " vs " + shape_string(reference.shape()));
  }
  Tape& tape = logits.tape();
  const Var log_q = ag::log_softmax(tape.constant(reference));
  const Var log_p = ag::log_softmax(logits);
  const Var p = ag::softmax(logits);
  const Var kl = ag::sum(ag::mul(p, ag::sub(log_p, tape.constant(log_q.value()))));
  return ag::scale(kl, 1.0 / static_cast<double>(logits.rows()));
}

Var ntxent_alignment_loss(Var mol, Var text, double tau) {
  if (mol.rows() == 0) throw Error(Errc::EmptyBatch, "alignment batch is empty");
  if (mol.rows() != text.rows()) {
    throw Error(Errc::LengthMismatch, "alignment batch has " + std::to_string(mol.rows()) +
                                          " molecules and " + std::to_string(text.rows()) +
                                          " texts");
  }
  if (!(tau > 0.0)) throw Error(Errc::InvalidRange, "temperature must be > 0");
  const Var sim =
      ag::scale(ag::matmul(ag::normalize_rows(mol), ag::transpose(ag::normalize_rows(text))),
                1.0 / tau);
  std::vector<int> diag(mol.rows());
  std::iota(diag.begin(), diag.end(), 0);
  const Var parts[] = {ag::cross_entropy(sim, diag), ag::cross_entropy(ag::transpose(sim), diag)};
  return ag::scale(ag::add_n(parts), 0.5);
}

Var ntxent_alignment_loss(std::span<const Var> mols, std::span<const Var> texts, double tau) {
  if (mols.empty() && texts.empty()) throw Error(Errc::EmptyBatch, "alignment batch is empty");
  if (mols.size() != texts.size()) {
    throw Error(Errc::LengthMismatch, "alignment batch has " + std::to_string(mols.size()) +
                                          " molecules and " + std::to_string(texts.size()) +
                                          " texts");
  }
  return ntxent_alignment_loss(ag::concat_rows(mols), ag::concat_rows(texts), tau);
}

TaskType task_from_name(std::string_view name) {
  if (name == "lm") return TaskType::Lm;
  if (name == "align") return TaskType::Align;
  if (name == "diffusion") return TaskType::Diffusion;
  if (name == "reaction") return TaskType::Reaction;
  throw Error(Errc::UnknownTaskType, "unknown task type '" + std::string(name) + "'");
}

std::string_view task_name(TaskType task) noexcept {
  switch (task) {
    case TaskType::Lm: return "lm";
    case TaskType::Align: return "align";
    case TaskType::Diffusion: return "diffusion";
    case TaskType::Reaction: return "reaction";
  }
  return "?";
}

Models::Models(const ModelConfig& cfg, Rng& rng) : config(cfg) {
  config.denoiser.text_width = config.lm.width;
  config.denoiser.length = config.autoencoder.length;
  config.denoiser.latent_width = config.autoencoder.latent_width;
  config.reaction.geo_width = config.gvp.scalar_width;
  config.gvp.model_width = config.lm.width;
  gvp = gvp::GvpEncoder(config.gvp, rng);
  lm = lm::LanguageModel(config.lm, rng);
  autoencoder = diffusion::SmilesAutoencoder(config.autoencoder, rng);
  denoiser = diffusion::Denoiser(config.denoiser, rng);
  schedule = diffusion::desk_schedule(config.diffusion_steps);
  reaction = rxn::ReactionModel(config.reaction, rng);
}

ParamRefs Models::params() {
  ParamRefs out;
  gvp.collect(out);
  lm.collect(out);
  autoencoder.collect(out);
  denoiser.collect(out);
  reaction.collect(out);
  return out;
}

const chem::MolecularGraph& MoleculeCache::graph(const std::string& smiles) {
  auto it = graphs_.find(smiles);
  if (it == graphs_.end()) it = graphs_.emplace(smiles, chem::parse_smiles(smiles)).first;
  return it->second;
}

const chem::Conformer& MoleculeCache::conformer(const std::string& smiles) {
  auto it = conformers_.find(smiles);
  if (it == conformers_.end()) {
    it = conformers_.emplace(smiles, chem::assign_conformer(graph(smiles), 0)).first;
  }
  return it->second;
}

Var molecule_embedding(Tape& tape, const gvp::GvpEncoder& encoder, MoleculeCache& cache,
                       const std::string& smiles) {
  return encoder.h_mol(tape, cache.graph(smiles), cache.conformer(smiles));
}

Var text_embedding(Tape& tape, const lm::LanguageModel& lm, std::string_view text) {
  std::vector<lm::Slot> slots;
  for (int id : lm::tokenize(text)) slots.push_back({id, std::nullopt});
  return ag::mean_rows(lm.hidden(tape, slots));
}

namespace {

template <typename T>
const T& payload(const JointItem& item) {
  const T* p = std::get_if<T>(&item.payload);
  if (!p) {
    throw Error(Errc::UnknownTaskType, "item tagged '" + item.task + "' carries a " +
                                           "payload of another task type");
  }
  return *p;
}

}  // namespace

JointTerms joint_loss(Tape& tape, Models& models, std::span<const JointItem> batch,
                      const LossWeights& weights, MoleculeCache& cache, Rng& rng, double tau) {
  std::vector<const LmItem*> lm_items;
  std::vector<const AlignItem*> align_items;
  std::vector<const DiffusionTextItem*> diff_items;
  std::vector<rxn::ReactionSample> rxn_items;
  for (const JointItem& item : batch) {
    switch (task_from_name(item.task)) {
      case TaskType::Lm: lm_items.push_back(&payload<LmItem>(item)); break;
      case TaskType::Align: align_items.push_back(&payload<AlignItem>(item)); break;
      case TaskType::Diffusion:
        diff_items.push_back(&payload<DiffusionTextItem>(item));
        break;
      case TaskType::Reaction:
        rxn_items.push_back(payload<rxn::ReactionSample>(item));
        break;
    }
  }

  JointTerms out;
  std::vector<Var> weighted;
  if (!lm_items.empty()) {
    std::vector<lm::LmExample> examples;
    for (const LmItem* it : lm_items) {
      lm::LmExample ex{it->prompt, {}, it->target};
      for (const std::string& s : it->molecules) {
        ex.structures.push_back(molecule_embedding(tape, models.gvp, cache, s));
      }
      examples.push_back(std::move(ex));
    }
    out.lm = lm::lm_loss(tape, models.lm, examples);
    weighted.push_back(ag::scale(*out.lm, weights.lm));
  }
  if (!align_items.empty()) {
    std::vector<Var> mols, texts;
    for (const AlignItem* it : align_items) {
      mols.push_back(molecule_embedding(tape, models.gvp, cache, it->smiles));
      texts.push_back(it->text ? tape.constant(*it->text)
                               : text_embedding(tape, models.lm, it->description));
    }
    out.align = ntxent_alignment_loss(mols, texts, tau);
    weighted.push_back(ag::scale(*out.align, weights.align));
  }
  if (!diff_items.empty()) {
    std::vector<Var> terms;
    for (const DiffusionTextItem* it : diff_items) {
      std::optional<Var> c;
      if (it->description) {
        std::vector<lm::Slot> slots;
        for (int id : lm::tokenize(*it->description)) slots.push_back({id, std::nullopt});
        c = models.denoiser.text_proj(tape, models.lm.hidden(tape, slots));
      }
      terms.push_back(diffusion::noise_loss(tape, models.autoencoder.encode(it->smiles), c,
                                            models.schedule, models.denoiser, rng));
    }
    out.diffusion = ag::scale(ag::add_n(terms), 1.0 / static_cast<double>(terms.size()));
    weighted.push_back(ag::scale(*out.diffusion, weights.diff));
  }
  if (!rxn_items.empty()) {
    out.reaction =
        rxn::reaction_loss(tape, models.reaction, rxn_items, weights.reaction(), rng).total;
    weighted.push_back(ag::scale(*out.reaction, weights.rxn));
  }
  out.total = weighted.empty() ? tape.constant(Tensor::scalar(0.0)) : ag::add_n(weighted);
  return out;
}

}  // namespace scm::train
