//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/chem/molecule.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <functional>
#include <set>
#include <utility>

#include "scm/core/error.hpp"

namespace scm::chem {
namespace {

struct ElementInfo {
  Element element;
  std::string_view symbol;
  int atomic_number;
  int valence;
  bool aromatic_ok;
  // Higher valence states accepted by the validity check (0 terminates).
  std::array<int, 3> allowed;
};

constexpr std::array<ElementInfo, kElementCount> kElements{{
    {Element::B, "B", 5, 3, true, {3, 0, 0}},
    {Element::C, "C", 6, 4, true, {4, 0, 0}},
    {Element::N, "N", 7, 3, true, {3, 0, 0}},
    {Element::O, "O", 8, 2, true, {2, 0, 0}},
    {Element::P, "P", 15, 3, true, {3, 5, 0}},
    {Element::S, "S", 16, 2, true, {2, 4, 6}},
    {Element::F, "F", 9, 1, false, {1, 0, 0}},
    {Element::Cl, "Cl", 17, 1, false, {1, 0, 0}},
    {Element::Br, "Br", 35, 1, false, {1, 0, 0}},
    {Element::I, "I", 53, 1, false, {1, 0, 0}},
}};

const ElementInfo& info(Element e) { return kElements[static_cast<std::size_t>(e)]; }

/// Valence shift caused by a formal charge: group 13 loses an electron pair
/// per positive charge, carbon loses one bond either way, and the others gain
/// bonding capacity with positive charge.
int charge_adjusted(Element e, int valence, int charge) {
  switch (e) {
    case Element::B: return valence - charge;
    case Element::C: return valence - std::abs(charge);
    default: return valence + charge;
  }
}

}  // namespace

std::string_view element_symbol(Element e) noexcept { return info(e).symbol; }

std::optional<Element> element_from_symbol(std::string_view symbol) noexcept {
  for (const ElementInfo& i : kElements) {
    if (i.symbol == symbol) return i.element;
  }
  return std::nullopt;
}

int atomic_number(Element e) noexcept { return info(e).atomic_number; }
int standard_valence(Element e) noexcept { return info(e).valence; }
bool can_be_aromatic(Element e) noexcept { return info(e).aromatic_ok; }

std::optional<int> implicit_hydrogens(Element e, bool aromatic, int load) noexcept {
  const ElementInfo& el = info(e);
  if (aromatic) {
    int max_allowed = 0;
    for (int v : el.allowed) max_allowed = std::max(max_allowed, v);
    if (load > max_allowed) return std::nullopt;
    return std::max(0, el.valence - load - 1);
  }
  for (int v : el.allowed) {
    if (v == 0) break;
    if (v >= load) return v - load;
  }
  return std::nullopt;
}

bool valence_fits(Element e, int charge, int load, int hydrogens) noexcept {
  const int used = load + hydrogens;
  for (int v : info(e).allowed) {
    if (v == 0) break;
    const int adjusted = charge_adjusted(e, v, charge);
    if (adjusted >= 0 && used <= adjusted) return true;
  }
  return false;
}

std::vector<std::vector<std::size_t>> MolecularGraph::incident_bonds() const {
  std::vector<std::vector<std::size_t>> out(atoms.size());
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    out[bonds[b].begin].push_back(b);
    out[bonds[b].end].push_back(b);
  }
  return out;
}

std::vector<std::vector<std::size_t>> MolecularGraph::neighbors() const {
  std::vector<std::vector<std::size_t>> out(atoms.size());
  for (const Bond& b : bonds) {
    out[b.begin].push_back(b.end);
    out[b.end].push_back(b.begin);
  }
  return out;
}

std::optional<std::size_t> MolecularGraph::find_bond(std::size_t a, std::size_t b) const {
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    if ((bonds[i].begin == a && bonds[i].end == b) || (bonds[i].begin == b && bonds[i].end == a))
      return i;
  }
  return std::nullopt;
}

std::vector<bool> ring_bonds(const MolecularGraph& graph) {
  // Tarjan bridge finding; a bond is a ring bond iff it is not a bridge.
  const std::size_t n = graph.atoms.size();
  const auto incident = graph.incident_bonds();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> ring(graph.bonds.size(), true);
  int clock = 0;

  std::function<void(std::size_t, std::optional<std::size_t>)> dfs =
      [&](std::size_t u, std::optional<std::size_t> via) {
        disc[u] = low[u] = clock++;
        for (std::size_t b : incident[u]) {
          if (via && b == *via) continue;
          const std::size_t v = graph.bonds[b].other(u);
          if (disc[v] < 0) {
            dfs(v, b);
            low[u] = std::min(low[u], low[v]);
            if (low[v] > disc[u]) ring[b] = false;
          } else {
            low[u] = std::min(low[u], disc[v]);
          }
        }
      };
  for (std::size_t u = 0; u < n; ++u) {
    if (disc[u] < 0) dfs(u, std::nullopt);
  }
  return ring;
}

std::vector<bool> ring_atoms(const MolecularGraph& graph) {
  const std::vector<bool> rb = ring_bonds(graph);
  std::vector<bool> out(graph.atoms.size(), false);
  for (std::size_t b = 0; b < graph.bonds.size(); ++b) {
    if (rb[b]) out[graph.bonds[b].begin] = out[graph.bonds[b].end] = true;
  }
  return out;
}

int bond_load(const MolecularGraph& graph, std::size_t atom) {
  int load = 0;
  for (const Bond& b : graph.bonds) {
    if (b.begin != atom && b.end != atom) continue;
    load += b.order == BondOrder::Aromatic ? 1 : static_cast<int>(b.order);
  }
  return load;
}

void validate(const MolecularGraph& graph) {
  const std::size_t n = graph.atoms.size();
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Bond& b : graph.bonds) {
    if (b.begin >= n || b.end >= n) {
      throw Error(Errc::IndexOutOfRange, "bond endpoint outside " + std::to_string(n) + " atoms");
    }
    if (b.begin == b.end) {
      throw Error(Errc::InvalidSyntax, "self-bond on atom " + std::to_string(b.begin));
    }
    if (!seen.emplace(std::min(b.begin, b.end), std::max(b.begin, b.end)).second) {
      throw Error(Errc::InvalidSyntax, "duplicate bond " + std::to_string(b.begin) + "-" +
                                           std::to_string(b.end));
    }
    if (b.order == BondOrder::Aromatic &&
        !(graph.atoms[b.begin].aromatic && graph.atoms[b.end].aromatic)) {
      throw Error(Errc::InvalidSyntax, "aromatic bond between non-aromatic atoms");
    }
  }
  const std::vector<bool> in_ring = ring_atoms(graph);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = graph.atoms[i];
    const int load = bond_load(graph, i);
    if (a.aromatic && !in_ring[i]) {
      throw Error(Errc::InvalidSyntax, "aromatic atom " + std::to_string(i) + " outside a ring");
    }
    if (!valence_fits(a.element, a.charge, load, a.total_h())) {
      throw Error(Errc::ValenceViolation, "atom " + std::to_string(i) + " exceeds valence");
    }
    if (!a.bracket) {
      const auto h = implicit_hydrogens(a.element, a.aromatic, load);
      if (a.charge != 0 || a.explicit_h != 0 || !h || *h != a.implicit_h) {
        throw Error(Errc::ValenceViolation,
                    "atom " + std::to_string(i) + " hydrogen count disagrees with valence");
      }
    } else if (a.implicit_h != 0) {
      throw Error(Errc::ValenceViolation, "bracket atom " + std::to_string(i) +
                                              " carries implicit hydrogens");
    }
  }
}

MolecularGraph permute_atoms(const MolecularGraph& graph, const std::vector<std::size_t>& order) {
  if (order.size() != graph.atoms.size()) {
    throw Error(Errc::IndexOutOfRange, "permutation size mismatch");
  }
  std::vector<std::size_t> new_index(order.size());
  MolecularGraph out;
  out.source = graph.source;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.atoms.push_back(graph.atoms.at(order[i]));
    new_index[order[i]] = i;
  }
  for (const Bond& b : graph.bonds) {
    out.bonds.push_back({new_index[b.begin], new_index[b.end], b.order});
  }
  std::sort(out.bonds.begin(), out.bonds.end(), [](const Bond& x, const Bond& y) {
    return std::minmax(x.begin, x.end) < std::minmax(y.begin, y.end);
  });
  return out;
}

}  // namespace scm::chem
