//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>

#include "scm/rxn/reaction.hpp"

namespace scm::rxn {

std::vector<ReactionRecord> synthetic_linear_yield(std::size_t count, Rng& rng) {
  static constexpr std::array<const char*, 6> kPool{"CCO", "CC(=O)O", "c1ccccc1",
                                                     "CCN", "CC(C)O", "CCOC(C)=O"};
  std::vector<ReactionRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double moles = rng.uniform(0.5, 2.0);
    const double equiv = rng.uniform(1.0, 3.0);
    const double volume = rng.uniform(5.0, 20.0);
    ReactionMolecule a{kPool[rng.below(kPool.size())], Role::Reactant, {}};
    a.amounts.raw[0] = moles;
    ReactionMolecule b{kPool[rng.below(kPool.size())], Role::Reactant, {}};
    b.amounts.raw[4] = equiv;
    ReactionMolecule solvent{"CCO", Role::Solvent, {}};
    solvent.amounts.raw[2] = volume;
    ReactionMolecule product{"CCOC(C)=O", Role::Product, {}};
    ReactionRecord r;
    r.molecules = {a, b, solvent, product};
    r.yield_percent = std::clamp(10.0 + 30.0 * moles + 15.0 * equiv - 2.0 * volume, 0.0, 100.0);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace scm::rxn
