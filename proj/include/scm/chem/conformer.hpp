//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "scm/chem/molecule.hpp"

namespace scm::chem {

using Vec3 = std::array<double, 3>;

struct Conformer {
  std::vector<Vec3> coords;
  std::uint64_t seed = 0;
};

struct LayoutOptions {
  int iterations = 200;
  double step = 0.05;
  double rest_length = 1.5;
  /// Strength of the k/d repulsion between non-bonded atoms.
  double repulsion = 0.5;
  /// Largest displacement of one atom in one iteration.
  double max_move = 0.3;
};

/// Deterministic 3D layout: seeded uniform start, fixed-iteration spring
/// relaxation, then centroid-centering.
Conformer assign_conformer(const MolecularGraph& graph, std::uint64_t seed,
                           const LayoutOptions& options = {});

}  // namespace scm::chem
