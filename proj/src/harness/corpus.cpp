//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/harness/corpus.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"
#include "scm/lm/tokenizer.hpp"

namespace scm::harness {
namespace {

using nlohmann::json;

// Calls f(line, number) for each non-blank line; strips a trailing '\r'.
void for_each_line(std::string_view text,
                   const std::function<void(std::string_view, std::size_t)>& f) {
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (line.find_first_not_of(" \t") != std::string_view::npos) f(line, number);
    pos = end + 1;
  }
}

[[noreturn]] void fail(std::size_t line, const std::string& reason) {
  throw LineError(Errc::CorpusParseError, line, reason);
}

std::string checked_smiles(std::string_view s, std::size_t line) {
  try {
    chem::parse_smiles(s);
  } catch (const Error& e) {
    fail(line, "invalid SMILES '" + std::string(s) + "': " + e.what());
  }
  return std::string(s);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double number(const json& v, const std::string& what, std::size_t line) {
  if (!v.is_number()) fail(line, what + " must be a number");
  return v.get<double>();
}

rxn::ReactionMolecule parse_molecule(const json& m, std::size_t line) {
  if (!m.is_object()) fail(line, "molecule entries must be objects");
  rxn::ReactionMolecule out;
  bool have_smiles = false, have_role = false;
  for (const auto& [key, value] : m.items()) {
    if (key == "smiles") {
      if (!value.is_string()) fail(line, "smiles must be a string");
      out.smiles = checked_smiles(value.get<std::string>(), line);
      have_smiles = true;
    } else if (key == "role") {
      if (!value.is_string()) fail(line, "role must be a string");
      try {
        out.role = rxn::role_from_name(value.get<std::string>());
      } catch (const Error& e) {
        fail(line, e.what());
      }
      have_role = true;
    } else if (key == "amount") {
      if (!value.is_object()) fail(line, "amount must be an object");
      for (const auto& [ak, av] : value.items()) {
        std::size_t c = 0;
        while (c < rxn::kAmountChannels && rxn::amount_channel_name(c) != ak) ++c;
        if (c == rxn::kAmountChannels) fail(line, "unknown amount key '" + ak + "'");
        if (!av.is_null()) out.amounts.raw[c] = number(av, "amount." + ak, line);
      }
    } else {
      fail(line, "unknown molecule key '" + key + "'");
    }
  }
  if (!have_smiles) fail(line, "molecule without smiles");
  if (!have_role) fail(line, "molecule without role");
  return out;
}

}  // namespace

CorpusKind corpus_kind(std::string_view name) {
  if (name == "smiles-lines") return CorpusKind::SmilesLines;
  if (name == "pair-tsv") return CorpusKind::PairTsv;
  if (name == "reaction-jsonl") return CorpusKind::ReactionJsonl;
  if (name == "prompts") return CorpusKind::Prompts;
  throw Error(Errc::ConfigError, "unknown corpus kind '" + std::string(name) + "'");
}

std::vector<std::string> parse_smiles_lines(std::string_view text) {
  std::vector<std::string> out;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    out.push_back(checked_smiles(trim(line), n));
  });
  return out;
}

std::vector<TextPair> parse_pairs(std::string_view text) {
  std::vector<TextPair> out;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) fail(n, "expected SMILES<TAB>description");
    TextPair p;
    p.smiles = checked_smiles(line.substr(0, tab), n);
    p.description = std::string(trim(line.substr(tab + 1)));
    if (p.description.empty()) fail(n, "empty description");
    try {
      lm::tokenize(p.description);
    } catch (const Error& e) {
      fail(n, e.what());
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<rxn::ReactionRecord> parse_reactions(std::string_view text) {
  std::vector<rxn::ReactionRecord> out;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(n, std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(n, "record must be a JSON object");
    rxn::ReactionRecord rec;
    bool have_molecules = false;
    for (const auto& [key, value] : doc.items()) {
      if (key == "molecules") {
        if (!value.is_array()) fail(n, "molecules must be an array");
        for (const auto& m : value) rec.molecules.push_back(parse_molecule(m, n));
        have_molecules = true;
      } else if (key == "yield_percent") {
        if (!value.is_null()) rec.yield_percent = number(value, "yield_percent", n);
      } else {
        fail(n, "unknown key '" + key + "'");
      }
    }
    if (!have_molecules) fail(n, "record without molecules");
    try {
      rxn::check_record(rec);
    } catch (const Error& e) {
      fail(n, e.what());
    }
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<std::string> parse_prompts(std::string_view text) {
  std::vector<std::string> out;
  for_each_line(text, [&](std::string_view line, std::size_t n) {
    try {
      lm::tokenize(line);
    } catch (const Error& e) {
      fail(n, e.what());
    }
    out.emplace_back(line);
  });
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Corpus load_corpus(const std::filesystem::path& path, CorpusKind kind) {
  const std::string text = read_file(path);
  switch (kind) {
    case CorpusKind::SmilesLines: return parse_smiles_lines(text);
    case CorpusKind::PairTsv: return parse_pairs(text);
    case CorpusKind::ReactionJsonl: return parse_reactions(text);
    case CorpusKind::Prompts: return parse_prompts(text);
  }
  throw Error(Errc::ConfigError, "unhandled corpus kind");
}

std::vector<std::string> load_smiles_lines(const std::filesystem::path& path) {
  return parse_smiles_lines(read_file(path));
}
std::vector<TextPair> load_pairs(const std::filesystem::path& path) {
  return parse_pairs(read_file(path));
}
std::vector<rxn::ReactionRecord> load_reactions(const std::filesystem::path& path) {
  return parse_reactions(read_file(path));
}
std::vector<std::string> load_prompts(const std::filesystem::path& path) {
  return parse_prompts(read_file(path));
}

}  // namespace scm::harness
