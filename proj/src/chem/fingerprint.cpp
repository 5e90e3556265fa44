//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/chem/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <set>

#include "scm/core/error.hpp"

namespace scm::chem {
namespace {

std::string atom_token(const Atom& a) {
  std::string s(element_symbol(a.element));
  if (a.aromatic) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

char bond_token(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return '-';
    case BondOrder::Double: return '=';
    case BondOrder::Triple: return '#';
    case BondOrder::Aromatic: return ':';
  }
  return '?';
}

struct PathWalker {
  const MolecularGraph& g;
  std::vector<std::vector<std::size_t>> incident;
  int max_path;
  std::vector<bool> on_path;
  std::vector<std::string> fwd;  // token sequence of the current path
  std::set<std::string> out;

  void record() {
    std::string a, b;
    for (const std::string& t : fwd) a += t;
    for (auto it = fwd.rbegin(); it != fwd.rend(); ++it) b += *it;
    out.insert(std::min(a, b));
  }

  void walk(std::size_t u, int bonds) {
    record();
    if (bonds == max_path) return;
    for (std::size_t bi : incident[u]) {
      const std::size_t v = g.bonds[bi].other(u);
      if (on_path[v]) continue;
      on_path[v] = true;
      fwd.emplace_back(1, bond_token(g.bonds[bi].order));
      fwd.push_back(atom_token(g.atoms[v]));
      walk(v, bonds + 1);
      fwd.pop_back();
      fwd.pop_back();
      on_path[v] = false;
    }
  }
};

}  // namespace

Fingerprint::Fingerprint(std::size_t width, int max_path)
    : width_(width), max_path_(max_path), words_((width + 63) / 64, 0) {}

bool Fingerprint::test(std::size_t bit) const noexcept {
  return bit < width_ && (words_[bit / 64] >> (bit % 64)) & 1u;
}

void Fingerprint::set(std::size_t bit) noexcept {
  if (bit < width_) words_[bit / 64] |= std::uint64_t{1} << (bit % 64);
}

std::size_t Fingerprint::count() const noexcept {
  std::size_t c = 0;
  for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::size_t> Fingerprint::set_bits() const {
  std::vector<std::size_t> bits;
  for (std::size_t i = 0; i < width_; ++i) {
    if (test(i)) bits.push_back(i);
  }
  return bits;
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> path_strings(const MolecularGraph& graph, int max_path) {
  PathWalker w{graph, graph.incident_bonds(), max_path,
               std::vector<bool>(graph.atoms.size(), false), {}, {}};
  for (std::size_t a = 0; a < graph.atoms.size(); ++a) {
    w.on_path[a] = true;
    w.fwd = {atom_token(graph.atoms[a])};
    w.walk(a, 0);
    w.on_path[a] = false;
  }
  return {w.out.begin(), w.out.end()};
}

Fingerprint path_fingerprint(const MolecularGraph& graph, std::size_t width, int max_path) {
  Fingerprint fp(width, max_path);
  for (const std::string& p : path_strings(graph, max_path)) fp.set(fnv1a64(p) % width);
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width_ != b.width_) {
    throw Error(Errc::WidthMismatch, "fingerprint widths " + std::to_string(a.width_) + " and " +
                                         std::to_string(b.width_));
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    inter += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
    uni += static_cast<std::size_t>(std::popcount(a.words_[i] | b.words_[i]));
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace scm::chem
