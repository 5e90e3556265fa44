//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scm/rxn/reaction.hpp"

namespace scm::harness {

enum class CorpusKind { SmilesLines, PairTsv, ReactionJsonl, Prompts };

/// "smiles-lines", "pair-tsv", "reaction-jsonl", "prompts". Throws ConfigError.
CorpusKind corpus_kind(std::string_view name);

struct TextPair {
  std::string smiles;
  std::string description;
};

// Parsers over in-memory text. Blank lines are skipped; any other bad line
// throws LineError(CorpusParseError) with its 1-based number.
std::vector<std::string> parse_smiles_lines(std::string_view text);
/// "SMILES<TAB>description" per line.
std::vector<TextPair> parse_pairs(std::string_view text);
/// One JSON object per line; unknown keys are rejected.
std::vector<rxn::ReactionRecord> parse_reactions(std::string_view text);
/// One prompt per line; markers such as <mol> are allowed.
std::vector<std::string> parse_prompts(std::string_view text);

using Corpus = std::variant<std::vector<std::string>, std::vector<TextPair>,
                            std::vector<rxn::ReactionRecord>>;

/// Reads and parses a file. Throws IoError when unreadable.
std::string read_file(const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path, CorpusKind kind);

std::vector<std::string> load_smiles_lines(const std::filesystem::path& path);
std::vector<TextPair> load_pairs(const std::filesystem::path& path);
std::vector<rxn::ReactionRecord> load_reactions(const std::filesystem::path& path);
std::vector<std::string> load_prompts(const std::filesystem::path& path);

}  // namespace scm::harness
