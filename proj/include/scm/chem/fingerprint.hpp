//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scm/chem/molecule.hpp"

namespace scm::chem {

class Fingerprint {
 public:
  explicit Fingerprint(std::size_t width = 2048, int max_path = 7);

  std::size_t width() const noexcept { return width_; }
  int max_path() const noexcept { return max_path_; }
  bool test(std::size_t bit) const noexcept;
  void set(std::size_t bit) noexcept;
  std::size_t count() const noexcept;
  std::vector<std::size_t> set_bits() const;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;

 private:
  std::size_t width_;
  int max_path_;
  std::vector<std::uint64_t> words_;
  friend double tanimoto(const Fingerprint& a, const Fingerprint& b);
};

std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Canonical strings of every simple path with 0..max_path bonds. Atoms are
/// written as element symbols (lowercase when aromatic) and bonds as - = # :.
/// Each path is stored as the smaller of its two reading directions.
std::vector<std::string> path_strings(const MolecularGraph& graph, int max_path = 7);

/// One bit per canonical path string: fnv1a64(path) mod width.
Fingerprint path_fingerprint(const MolecularGraph& graph, std::size_t width = 2048,
                             int max_path = 7);

/// |a & b| / |a | b|; 1.0 when both are empty. Throws WidthMismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace scm::chem
