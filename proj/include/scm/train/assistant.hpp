//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scm/train/losses.hpp"

namespace scm::train {

/// Candidate molecules for retrieval, with their encoder geometry.
struct ReactionLibraries {
  std::vector<rxn::LibraryEntry> products;
  std::vector<rxn::LibraryEntry> reactants;
  rxn::AmountNormalizer normalizer;
};

/// h_geo of a SMILES from the encoder, conformer seed 0.
Tensor geometry(const gvp::GvpEncoder& encoder, const std::string& smiles);

/// Distinct products and reactants of the corpus in first-seen order, and
/// the amount normalizer fitted on it.
ReactionLibraries build_libraries(const gvp::GvpEncoder& encoder,
                                  std::span<const rxn::ReactionRecord> corpus);

enum class ReactTask { Product, Retro, Yield };
/// "product", "retro", "yield". Throws ConfigError.
ReactTask react_task_from_name(std::string_view name);

struct ReactAnswer {
  /// Retrieved molecules for the masked slots, in slot order.
  std::vector<std::string> molecules;
  /// Predicted yield percent in [0, 100].
  double yield_percent = 0.0;
};

/// Product: masks every product and retrieves each from the product library.
/// Retro: masks every reactant and retrieves from the reactant library.
/// Yield: nothing masked. Throws EmptyLibrary.
ReactAnswer react(const Models& models, const ReactionLibraries& libs,
                  const rxn::ReactionRecord& record, ReactTask task);

struct GenerateSettings {
  diffusion::GuidanceConfig guidance;
  std::optional<std::string> source;
  std::size_t bridge_t = 0;
  /// Draws until one passes check_validity; the last draw is kept otherwise.
  std::size_t attempts = 4;
};

/// Dispatch handlers over the trained modules.
///   perceive: h_mol of the SMILES.
///   generate: condition text_proj(hidden), then latent diffusion sampling.
///   react: the SMILES entities of the context become reactants of a record
///     with one masked product; answers " -> PRODUCT (yield Y%)".
/// `rng` must outlive the handlers.
lm::DispatchHandlers make_handlers(const Models& models, const ReactionLibraries& libs,
                                   const GenerateSettings& settings, Rng& rng);

/// Runs the language model on `prompt` with `forced` picked at the first
/// step and <eos> once the module output is in place.
lm::Generation forced_dispatch(const Models& models, const lm::DispatchHandlers& handlers,
                               std::string_view prompt, int forced, Rng& rng);

}  // namespace scm::train
