//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scm::chem {

enum class Element : std::uint8_t { B, C, N, O, P, S, F, Cl, Br, I };
inline constexpr std::size_t kElementCount = 10;

std::string_view element_symbol(Element e) noexcept;
std::optional<Element> element_from_symbol(std::string_view symbol) noexcept;
int atomic_number(Element e) noexcept;
/// Default valence used for implicit hydrogens: B 3, C 4, N 3, O 2, P 3, S 2,
/// halogens 1.
int standard_valence(Element e) noexcept;
/// Elements that may appear in lowercase (aromatic) form.
bool can_be_aromatic(Element e) noexcept;

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  Element element = Element::C;
  int charge = 0;
  /// Hydrogens written inside a bracket atom.
  int explicit_h = 0;
  /// Hydrogens implied by the valence model (organic-subset atoms only).
  int implicit_h = 0;
  bool aromatic = false;
  bool bracket = false;

  int total_h() const noexcept { return explicit_h + implicit_h; }
};

struct Bond {
  std::size_t begin = 0;
  std::size_t end = 0;
  BondOrder order = BondOrder::Single;

  std::size_t other(std::size_t atom) const noexcept { return atom == begin ? end : begin; }
};

struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source;

  std::size_t atom_count() const noexcept { return atoms.size(); }
  std::size_t bond_count() const noexcept { return bonds.size(); }

  /// Bond indices incident to each atom, in bond order.
  std::vector<std::vector<std::size_t>> incident_bonds() const;
  std::vector<std::vector<std::size_t>> neighbors() const;
  std::optional<std::size_t> find_bond(std::size_t a, std::size_t b) const;
};

/// Bonds lying on at least one cycle (non-bridges).
std::vector<bool> ring_bonds(const MolecularGraph& graph);
/// Atoms incident to at least one ring bond.
std::vector<bool> ring_atoms(const MolecularGraph& graph);

/// Implicit hydrogen count of an unbracketed atom with the given valence
/// load, or nullopt when no permitted valence state accommodates the load.
/// Non-aromatic atoms fill up to the smallest permitted valence >= load;
/// aromatic atoms reserve one electron for the ring system.
std::optional<int> implicit_hydrogens(Element e, bool aromatic, int load) noexcept;
/// Whether load + hydrogens fits a permitted valence for the element and
/// formal charge.
bool valence_fits(Element e, int charge, int load, int hydrogens) noexcept;

/// Valence load of an atom: non-aromatic bond orders plus one per aromatic
/// bond.
int bond_load(const MolecularGraph& graph, std::size_t atom);

/// Checks the graph invariants (index ranges, self and duplicate bonds,
/// aromatic bond endpoints, valence and hydrogen counts). Throws scm::Error
/// describing the first violation.
void validate(const MolecularGraph& graph);

/// Returns a copy with atoms reordered so that new atom i is old atom
/// order[i]. Bond list order follows the new indices.
MolecularGraph permute_atoms(const MolecularGraph& graph, const std::vector<std::size_t>& order);

}  // namespace scm::chem
