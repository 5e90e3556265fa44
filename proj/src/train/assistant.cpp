//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/train/assistant.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"
#include "scm/lm/tokenizer.hpp"

namespace scm::train {

Tensor geometry(const gvp::GvpEncoder& encoder, const std::string& smiles) {
  return encoder.embed_geo(chem::parse_smiles(smiles), 0);
}

ReactionLibraries build_libraries(const gvp::GvpEncoder& encoder,
                                  std::span<const rxn::ReactionRecord> corpus) {
  ReactionLibraries libs;
  std::set<std::string> seen_products, seen_reactants;
  for (const rxn::ReactionRecord& r : corpus) {
    for (const rxn::ReactionMolecule& m : r.molecules) {
      if (m.role == rxn::Role::Product && seen_products.insert(m.smiles).second) {
        libs.products.push_back({m.smiles, geometry(encoder, m.smiles)});
      }
      if (m.role == rxn::Role::Reactant && seen_reactants.insert(m.smiles).second) {
        libs.reactants.push_back({m.smiles, geometry(encoder, m.smiles)});
      }
    }
  }
  libs.normalizer = rxn::AmountNormalizer::fit(corpus);
  return libs;
}

ReactTask react_task_from_name(std::string_view name) {
  if (name == "product") return ReactTask::Product;
  if (name == "retro") return ReactTask::Retro;
  if (name == "yield") return ReactTask::Yield;
  throw Error(Errc::ConfigError, "unknown reaction task '" + std::string(name) + "'");
}

ReactAnswer react(const Models& models, const ReactionLibraries& libs,
                  const rxn::ReactionRecord& record, ReactTask task) {
  const rxn::GeometryFn geo = [&](const std::string& s) { return geometry(models.gvp, s); };
  const rxn::PreparedReaction rx = rxn::prepare(record, libs.normalizer, geo);
  std::vector<std::size_t> mask;
  if (task != ReactTask::Yield) {
    const rxn::Role role = task == ReactTask::Product ? rxn::Role::Product : rxn::Role::Reactant;
    for (std::size_t i = 0; i < rx.size(); ++i) {
      if (rx.roles[i] == role) mask.push_back(i);
    }
  }
  ReactAnswer out;
  if (!mask.empty()) {
    const auto& library = task == ReactTask::Product ? libs.products : libs.reactants;
    for (const Tensor& q : models.reaction.predict_masked(rx, mask)) {
      out.molecules.push_back(rxn::retrieve_nearest(q, library));
    }
  }
  out.yield_percent = std::clamp(models.reaction.predict_yield(rx, mask).percent(), 0.0, 100.0);
  return out;
}

namespace {

// SMILES between <mol> and </mol> markers, or detected entities when the
// text has no markers.
std::vector<std::string> context_molecules(const std::string& context) {
  std::vector<std::string> out;
  const std::string open(lm::marker(lm::kMolOpen)), close(lm::marker(lm::kMolClose));
  for (std::size_t pos = context.find(open); pos != std::string::npos;
       pos = context.find(open, pos + 1)) {
    const std::size_t end = context.find(close, pos);
    if (end == std::string::npos) break;
    std::string s = context.substr(pos + open.size(), end - pos - open.size());
    if (chem::check_validity(s)) out.push_back(std::move(s));
  }
  if (out.empty()) {
    const std::vector<int> ids = lm::tokenize(context);
    const std::string text = lm::plain_text(ids);
    for (const lm::Span& sp : lm::detect_entities(text)) {
      out.push_back(text.substr(sp.begin, sp.length));
    }
  }
  return out;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

lm::DispatchHandlers make_handlers(const Models& models, const ReactionLibraries& libs,
                                   const GenerateSettings& settings, Rng& rng) {
  lm::DispatchHandlers h;
  h.perceive = [&models](const std::string& smiles) {
    return models.gvp.embed_mol(chem::parse_smiles(smiles), 0);
  };
  h.generate = [&models, settings, &rng](const Tensor& hidden) {
    diffusion::SampleRequest req;
    req.condition = models.denoiser.text_proj(hidden);
    req.guidance = settings.guidance;
    req.source = settings.source;
    req.bridge_t = settings.bridge_t;
    std::string smiles;
    for (std::size_t a = 0; a < std::max<std::size_t>(settings.attempts, 1); ++a) {
      smiles = diffusion::sample(req, models.schedule, models.denoiser, models.autoencoder, rng);
      if (chem::check_validity(smiles)) break;
    }
    return smiles;
  };
  h.react = [&models, &libs](const std::string& context) -> std::string {
    const std::vector<std::string> mols = context_molecules(context);
    if (mols.empty()) return " -> ? (no reactants)";
    rxn::ReactionRecord record;
    for (const std::string& s : mols) record.molecules.push_back({s, rxn::Role::Reactant, {}});
    // Placeholder product; the slot is masked.
    record.molecules.push_back({mols.front(), rxn::Role::Product, {}});
    const ReactAnswer a = react(models, libs, record, ReactTask::Product);
    return " -> " + a.molecules.front() + " (yield " + format_percent(a.yield_percent) + "%)";
  };
  return h;
}

lm::Generation forced_dispatch(const Models& models, const lm::DispatchHandlers& handlers,
                               std::string_view prompt, int forced, Rng& rng) {
  std::vector<int> ids = lm::tokenize(prompt);
  if (ids.empty() || ids.front() != lm::kBos) ids.insert(ids.begin(), lm::kBos);
  lm::GenerateOptions opt;
  opt.logit_hook = [forced](std::size_t step, std::span<double> logits) {
    std::fill(logits.begin(), logits.end(), std::numeric_limits<double>::lowest());
    logits[static_cast<std::size_t>(step == 0 ? forced : lm::kEos)] = 0.0;
  };
  return lm::generate_with_dispatch(models.lm, ids, handlers, rng, opt);
}

}  // namespace scm::train
