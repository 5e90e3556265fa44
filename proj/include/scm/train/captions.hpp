//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string>
#include <vector>

#include "scm/chem/molecule.hpp"
#include "scm/harness/corpus.hpp"

namespace scm::train {

/// Templated description: heavy-atom counts, ring summary and functional
/// groups, e.g. "2 carbon, 1 oxygen; acyclic; hydroxyl".
std::string caption(const chem::MolecularGraph& graph);

/// One (SMILES, caption) pair per input. Throws InvalidSmiles.
std::vector<harness::TextPair> templated_pairs(std::span<const std::string> smiles);

}  // namespace scm::train
