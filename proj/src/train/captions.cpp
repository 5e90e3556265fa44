//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/train/captions.hpp"

#include <array>
#include <map>

#include "scm/chem/smiles.hpp"

namespace scm::train {
namespace {

using chem::BondOrder;
using chem::Element;

constexpr std::array<const char*, chem::kElementCount> kNames{
    "boron", "carbon", "nitrogen", "oxygen", "phosphorus",
    "sulfur", "fluorine", "chlorine", "bromine", "iodine"};

bool is_halogen(Element e) {
  return e == Element::F || e == Element::Cl || e == Element::Br || e == Element::I;
}

}  // namespace

std::string caption(const chem::MolecularGraph& g) {
  std::array<int, chem::kElementCount> counts{};
  for (const auto& a : g.atoms) ++counts[static_cast<std::size_t>(a.element)];
  std::string out;
  for (std::size_t e = 0; e < counts.size(); ++e) {
    if (counts[e] == 0) continue;
    if (!out.empty()) out += ", ";
    out += std::to_string(counts[e]) + " " + kNames[e];
  }

  const auto in_ring = chem::ring_atoms(g);
  bool aromatic = false, aliphatic_ring = false;
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    aromatic |= g.atoms[i].aromatic;
    aliphatic_ring |= in_ring[i] && !g.atoms[i].aromatic;
  }
  out += aromatic ? (aliphatic_ring ? "; aromatic and aliphatic rings" : "; aromatic ring")
                  : (aliphatic_ring ? "; aliphatic ring" : "; acyclic");

  // functional groups in a fixed order
  std::map<int, std::string> groups;
  const auto nbrs = g.neighbors();
  auto carbonyl_carbon = [&](std::size_t c) {
    if (g.atoms[c].element != Element::C) return false;
    for (std::size_t n : nbrs[c]) {
      const auto b = g.find_bond(c, n);
      if (g.atoms[n].element == Element::O && g.bonds[*b].order == BondOrder::Double) return true;
    }
    return false;
  };
  for (const auto& b : g.bonds) {
    const Element x = g.atoms[b.begin].element, y = g.atoms[b.end].element;
    const bool co = (x == Element::C && y == Element::O) || (x == Element::O && y == Element::C);
    const bool cn = (x == Element::C && y == Element::N) || (x == Element::N && y == Element::C);
    if (b.order == BondOrder::Double && co) groups[1] = "carbonyl";
    if (b.order == BondOrder::Triple && cn) groups[5] = "nitrile";
    if (b.order == BondOrder::Double && x == Element::C && y == Element::C) groups[7] = "alkene";
    if (b.order == BondOrder::Triple && x == Element::C && y == Element::C) groups[8] = "alkyne";
    if (b.order == BondOrder::Double && cn) groups[6] = "imine";
  }
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    const auto& a = g.atoms[i];
    bool next_to_carbonyl = false;
    for (std::size_t n : nbrs[i]) next_to_carbonyl |= carbonyl_carbon(n);
    if (a.element == Element::O && !a.aromatic && nbrs[i].size() == 1 && a.total_h() > 0) {
      groups[next_to_carbonyl ? 2 : 0] = next_to_carbonyl ? "carboxylic acid" : "hydroxyl";
    }
    if (a.element == Element::O && nbrs[i].size() == 2 && !a.aromatic) {
      groups[next_to_carbonyl ? 3 : 4] = next_to_carbonyl ? "ester" : "ether";
    }
    if (a.element == Element::N && !a.aromatic && a.total_h() > 0) {
      groups[next_to_carbonyl ? 9 : 10] = next_to_carbonyl ? "amide" : "amine";
    }
    if (a.element == Element::N && a.aromatic) groups[11] = "aromatic nitrogen";
    if (is_halogen(a.element)) groups[12] = "halide";
    if (a.element == Element::S && !a.aromatic) groups[13] = "sulfur linkage";
  }
  for (const auto& [order, name] : groups) out += "; " + name;
  return out;
}

std::vector<harness::TextPair> templated_pairs(std::span<const std::string> smiles) {
  std::vector<harness::TextPair> out;
  for (const std::string& s : smiles) out.push_back({s, caption(chem::parse_smiles(s))});
  return out;
}

}  // namespace scm::train
