//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <string_view>

#include "scm/chem/molecule.hpp"

namespace scm::chem {

/// Parses the supported SMILES subset: organic atoms B C N O P S F Cl Br I,
/// aromatic b c n o p s, bonds - = #, branches, ring closures 0-9 and %nn,
/// and bracket atoms [Sym Hn +/-n]. Throws SmilesError carrying the offset of
/// the offending character.
MolecularGraph parse_smiles(std::string_view text);

/// Writes a SMILES string that parses back to a graph isomorphic to `graph`.
/// The output is not canonical.
std::string write_smiles(const MolecularGraph& graph);

/// True iff parse_smiles accepts the text.
bool check_validity(std::string_view text) noexcept;

}  // namespace scm::chem
