//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "scm/core/error.hpp"

namespace scm::chem {
namespace {

struct PendingBond {
  BondOrder order;
  std::size_t offset;
};

struct RingOpen {
  std::size_t atom;
  std::optional<PendingBond> bond;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  MolecularGraph run() {
    if (s_.empty()) throw SmilesError(Errc::InvalidSyntax, 0, "empty SMILES");
    while (pos_ < s_.size()) step();
    if (pending_) throw SmilesError(Errc::InvalidSyntax, pending_->offset, "dangling bond");
    if (!branches_.empty()) {
      throw SmilesError(Errc::UnbalancedParenthesis, branches_.back().offset, "unclosed branch");
    }
    if (!rings_.empty()) {
      auto first = std::min_element(rings_.begin(), rings_.end(), [](const auto& a, const auto& b) {
        return a.second.offset < b.second.offset;
      });
      throw SmilesError(Errc::UnclosedRing, first->second.offset,
                        "ring " + std::to_string(first->first) + " never closed");
    }
    finish();
    g_.source = std::string(s_);
    return std::move(g_);
  }

 private:
  struct Branch {
    std::size_t atom;
    std::size_t offset;
    std::size_t atoms_at_open;
  };

  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(': {
        if (!prev_) throw SmilesError(Errc::InvalidSyntax, pos_, "branch without a preceding atom");
        if (pending_) throw SmilesError(Errc::InvalidSyntax, pending_->offset, "dangling bond");
        branches_.push_back({*prev_, pos_, g_.atoms.size()});
        ++pos_;
        return;
      }
      case ')': {
        if (branches_.empty()) {
          throw SmilesError(Errc::UnbalancedParenthesis, pos_, "unmatched ')'");
        }
        if (pending_) throw SmilesError(Errc::InvalidSyntax, pending_->offset, "dangling bond");
        if (g_.atoms.size() == branches_.back().atoms_at_open) {
          throw SmilesError(Errc::InvalidSyntax, pos_, "empty branch");
        }
        prev_ = branches_.back().atom;
        branches_.pop_back();
        ++pos_;
        return;
      }
      case '-':
      case '=':
      case '#': {
        if (!prev_) throw SmilesError(Errc::InvalidSyntax, pos_, "bond without a preceding atom");
        if (pending_) throw SmilesError(Errc::InvalidSyntax, pos_, "consecutive bond symbols");
        const BondOrder order =
            c == '-' ? BondOrder::Single : c == '=' ? BondOrder::Double : BondOrder::Triple;
        pending_ = PendingBond{order, pos_};
        ++pos_;
        return;
      }
      case '%': {
        const std::size_t at = pos_;
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
          throw SmilesError(Errc::InvalidSyntax, at, "'%' must be followed by two digits");
        }
        const int n = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        pos_ += 3;
        ring(n, at);
        return;
      }
      case '[':
        bracket_atom();
        return;
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ++pos_;
      ring(c - '0', pos_ - 1);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      organic_atom();
      return;
    }
    throw SmilesError(Errc::InvalidSyntax, pos_, std::string("unexpected character '") + c + "'");
  }

  void organic_atom() {
    const std::size_t at = pos_;
    Atom atom;
    if (s_.compare(pos_, 2, "Cl") == 0 || s_.compare(pos_, 2, "Br") == 0) {
      atom.element = *element_from_symbol(s_.substr(pos_, 2));
      pos_ += 2;
    } else {
      const char c = s_[pos_];
      const bool lower = std::islower(static_cast<unsigned char>(c));
      const std::string sym(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      const auto e = element_from_symbol(sym);
      if (!e || (lower && !can_be_aromatic(*e))) {
        throw SmilesError(Errc::UnknownAtomSymbol, at, std::string("unknown atom '") + c + "'");
      }
      atom.element = *e;
      atom.aromatic = lower;
      ++pos_;
    }
    add_atom(atom, at);
  }

  void bracket_atom() {
    const std::size_t at = pos_;
    const std::size_t close = s_.find(']', pos_);
    if (close == std::string_view::npos) {
      throw SmilesError(Errc::InvalidSyntax, at, "unterminated bracket atom");
    }
    std::size_t i = pos_ + 1;
    Atom atom;
    atom.bracket = true;
    // Symbol: two-letter form first, then one letter (either case).
    std::optional<Element> e;
    if (i + 1 < close && std::isupper(static_cast<unsigned char>(s_[i])) &&
        std::islower(static_cast<unsigned char>(s_[i + 1]))) {
      e = element_from_symbol(s_.substr(i, 2));
      if (e) i += 2;
    }
    if (!e && i < close && std::isalpha(static_cast<unsigned char>(s_[i]))) {
      const char c = s_[i];
      const bool lower = std::islower(static_cast<unsigned char>(c));
      e = element_from_symbol(
          std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c)))));
      if (e && lower && !can_be_aromatic(*e)) e.reset();
      if (e) {
        atom.aromatic = lower;
        ++i;
      }
    }
    if (!e) throw SmilesError(Errc::UnknownAtomSymbol, i, "unknown bracket atom symbol");
    atom.element = *e;

    if (i < close && s_[i] == 'H') {
      ++i;
      atom.explicit_h = 1;
      if (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
        atom.explicit_h = s_[i] - '0';
        ++i;
      }
    }
    if (i < close && (s_[i] == '+' || s_[i] == '-')) {
      const char sign = s_[i];
      const int unit = sign == '+' ? 1 : -1;
      ++i;
      if (i < close && std::isdigit(static_cast<unsigned char>(s_[i]))) {
        atom.charge = unit * (s_[i] - '0');
        ++i;
      } else {
        atom.charge = unit;
        while (i < close && s_[i] == sign) {
          atom.charge += unit;
          ++i;
        }
      }
    }
    if (i != close) throw SmilesError(Errc::InvalidSyntax, i, "unexpected text in bracket atom");
    pos_ = close + 1;
    add_atom(atom, at);
  }

  void add_atom(const Atom& atom, std::size_t offset) {
    const std::size_t idx = g_.atoms.size();
    g_.atoms.push_back(atom);
    offsets_.push_back(offset);
    if (prev_) connect(*prev_, idx, pending_, offset);
    pending_.reset();
    prev_ = idx;
  }

  void ring(int number, std::size_t offset) {
    if (!prev_) throw SmilesError(Errc::InvalidSyntax, offset, "ring closure without an atom");
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, RingOpen{*prev_, pending_, offset});
      pending_.reset();
      return;
    }
    RingOpen open = it->second;
    rings_.erase(it);
    std::optional<PendingBond> bond = open.bond;
    if (pending_) {
      if (bond && bond->order != pending_->order) {
        throw SmilesError(Errc::InvalidSyntax, pending_->offset, "conflicting ring bond symbols");
      }
      bond = pending_;
    }
    pending_.reset();
    if (open.atom == *prev_) throw SmilesError(Errc::InvalidSyntax, offset, "ring closes on itself");
    connect(open.atom, *prev_, bond, offset);
  }

  void connect(std::size_t a, std::size_t b, std::optional<PendingBond> bond, std::size_t offset) {
    if (g_.find_bond(a, b)) throw SmilesError(Errc::InvalidSyntax, offset, "duplicate bond");
    BondOrder order;
    if (bond) {
      order = bond->order;
    } else {
      order = g_.atoms[a].aromatic && g_.atoms[b].aromatic ? BondOrder::Aromatic
                                                           : BondOrder::Single;
    }
    g_.bonds.push_back({a, b, order});
  }

  void finish() {
    const std::vector<bool> in_ring = ring_atoms(g_);
    const auto incident = g_.incident_bonds();
    for (std::size_t i = 0; i < g_.atoms.size(); ++i) {
      Atom& a = g_.atoms[i];
      if (a.aromatic) {
        bool ring_bond = false;
        for (std::size_t b : incident[i]) ring_bond |= g_.bonds[b].order == BondOrder::Aromatic;
        if (!in_ring[i] || !ring_bond) {
          throw SmilesError(Errc::InvalidSyntax, offsets_[i], "aromatic atom outside a ring");
        }
      }
      const int load = bond_load(g_, i);
      if (!a.bracket) {
        const auto h = implicit_hydrogens(a.element, a.aromatic, load);
        if (!h) throw SmilesError(Errc::ValenceViolation, offsets_[i], "valence exceeded");
        a.implicit_h = *h;
      }
      if (!valence_fits(a.element, a.charge, load, a.total_h())) {
        throw SmilesError(Errc::ValenceViolation, offsets_[i], "valence exceeded");
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  MolecularGraph g_;
  std::vector<std::size_t> offsets_;
  std::optional<std::size_t> prev_;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::map<int, RingOpen> rings_;
};

// Writer ------------------------------------------------------------------

std::string atom_text(const MolecularGraph& g, std::size_t i) {
  const Atom& a = g.atoms[i];
  std::string sym(element_symbol(a.element));
  if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  const auto bare_h = implicit_hydrogens(a.element, a.aromatic, bond_load(g, i));
  if (a.charge == 0 && bare_h && *bare_h == a.total_h()) return sym;
  std::string out = "[" + sym;
  if (a.total_h() > 0) out += a.total_h() == 1 ? "H" : "H" + std::to_string(a.total_h());
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  return out + "]";
}

std::string bond_text(const MolecularGraph& g, const Bond& b) {
  switch (b.order) {
    case BondOrder::Single:
      return g.atoms[b.begin].aromatic && g.atoms[b.end].aromatic ? "-" : "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic: return "";
  }
  return "";
}

std::string ring_label(int digit) {
  return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
}

class Writer {
 public:
  explicit Writer(const MolecularGraph& g) : g_(g), incident_(g.incident_bonds()) {}

  std::string run() {
    const std::size_t n = g_.atoms.size();
    order_.assign(n, kUnvisited);
    tree_.assign(g_.bonds.size(), false);
    children_.assign(n, {});
    number(0, std::nullopt);
    if (counter_ != n) {
      throw Error(Errc::InvalidSyntax, "cannot write a disconnected graph as one SMILES string");
    }
    emit(0);
    return out_;
  }

 private:
  static constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);

  void number(std::size_t u, std::optional<std::size_t> via) {
    order_[u] = counter_++;
    for (std::size_t b : incident_[u]) {
      if (via && b == *via) continue;
      const std::size_t v = g_.bonds[b].other(u);
      if (order_[v] != kUnvisited) continue;
      tree_[b] = true;
      children_[u].push_back(b);
      number(v, b);
    }
  }

  void emit(std::size_t u) {
    out_ += atom_text(g_, u);
    // Ring bonds: close those opened earlier, then open new ones.
    std::vector<int> freed;
    std::vector<std::size_t> opening;
    for (std::size_t b : incident_[u]) {
      if (tree_[b]) continue;
      const std::size_t v = g_.bonds[b].other(u);
      if (order_[v] < order_[u]) {
        const int d = open_.at(b);
        out_ += ring_label(d);
        open_.erase(b);
        freed.push_back(d);
      } else {
        opening.push_back(b);
      }
    }
    for (std::size_t b : opening) {
      int d = 1;
      while (used_.count(d)) ++d;
      used_.insert(d);
      open_[b] = d;
      out_ += bond_text(g_, g_.bonds[b]) + ring_label(d);
    }
    for (int d : freed) used_.erase(d);

    for (std::size_t k = 0; k < children_[u].size(); ++k) {
      const Bond& b = g_.bonds[children_[u][k]];
      const bool last = k + 1 == children_[u].size();
      if (!last) out_ += '(';
      out_ += bond_text(g_, b);
      emit(b.other(u));
      if (!last) out_ += ')';
    }
  }

  const MolecularGraph& g_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::size_t> order_;
  std::vector<bool> tree_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t counter_ = 0;
  std::map<std::size_t, int> open_;
  std::set<int> used_;
  std::string out_;
};

}  // namespace

MolecularGraph parse_smiles(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (static_cast<unsigned char>(text[i]) > 127) {
      throw SmilesError(Errc::InvalidSyntax, i, "non-ASCII character");
    }
  }
  return Parser(text).run();
}

std::string write_smiles(const MolecularGraph& graph) {
  if (graph.atoms.empty()) throw Error(Errc::EmptyGraph, "no atoms to write");
  return Writer(graph).run();
}

bool check_validity(std::string_view text) noexcept {
  try {
    parse_smiles(text);
    return true;
  } catch (const Error&) {
    return false;
  } catch (...) {
    return false;
  }
}

}  // namespace scm::chem
