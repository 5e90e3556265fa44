//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/chem/conformer.hpp"

#include <algorithm>
#include <cmath>

#include "scm/core/rng.hpp"

namespace scm::chem {

Conformer assign_conformer(const MolecularGraph& graph, std::uint64_t seed,
                           const LayoutOptions& opt) {
  const std::size_t n = graph.atoms.size();
  Conformer conf;
  conf.seed = seed;
  conf.coords.resize(n);

  Rng rng(seed);
  const double box = opt.rest_length * std::cbrt(static_cast<double>(std::max<std::size_t>(n, 1)));
  for (Vec3& p : conf.coords) {
    for (double& x : p) x = rng.uniform(-box, box);
  }

  std::vector<std::vector<bool>> bonded(n, std::vector<bool>(n, false));
  for (const Bond& b : graph.bonds) bonded[b.begin][b.end] = bonded[b.end][b.begin] = true;

  std::vector<Vec3> grad(n);
  for (int it = 0; it < opt.iterations; ++it) {
    for (Vec3& g : grad) g = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Vec3 d;
        double r2 = 0.0;
        for (int k = 0; k < 3; ++k) {
          d[k] = conf.coords[i][k] - conf.coords[j][k];
          r2 += d[k] * d[k];
        }
        const double r = std::max(std::sqrt(r2), 1e-6);
        double coef;  // dE/dr divided by r
        if (bonded[i][j]) {
          coef = 2.0 * (r - opt.rest_length) / r;
        } else {
          const double rc = std::max(r, 0.1);
          coef = -opt.repulsion / (rc * rc) / r;
        }
        for (int k = 0; k < 3; ++k) {
          grad[i][k] += coef * d[k];
          grad[j][k] -= coef * d[k];
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double len2 = 0.0;
      for (int k = 0; k < 3; ++k) len2 += grad[i][k] * grad[i][k];
      const double move = opt.step * std::sqrt(len2);
      const double scale = move > opt.max_move ? opt.max_move / move : 1.0;
      for (int k = 0; k < 3; ++k) conf.coords[i][k] -= opt.step * scale * grad[i][k];
    }
  }

  Vec3 centroid{0.0, 0.0, 0.0};
  for (const Vec3& p : conf.coords) {
    for (int k = 0; k < 3; ++k) centroid[k] += p[k];
  }
  for (int k = 0; k < 3; ++k) centroid[k] /= static_cast<double>(std::max<std::size_t>(n, 1));
  for (Vec3& p : conf.coords) {
    for (int k = 0; k < 3; ++k) p[k] -= centroid[k];
  }
  return conf;
}

}  // namespace scm::chem
