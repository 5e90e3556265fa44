//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scm::lm {

enum Special : int {
  kPad = 0,
  kBos = 1,
  kEos = 2,
  kMolOpen = 3,
  kMolClose = 4,
  kPerceive = 5,
  kGenerate = 6,
  kReact = 7,
};

inline constexpr int kSpecialCount = 8;
/// Specials followed by printable ASCII 32..126.
inline constexpr int kVocabSize = kSpecialCount + 95;

bool is_dispatch(int id) noexcept;
bool is_char_token(int id) noexcept;

/// Literal marker for a special id ("<mol>", "<d:generate>", ...).
std::string_view marker(int id);

/// Character-level tokenization. Markers are recognised anywhere in the
/// text; every other byte must be printable ASCII (VocabOverflow otherwise).
std::vector<int> tokenize(std::string_view text);

/// Inverse of tokenize; specials are written as their markers. Throws
/// VocabOverflow for ids outside the vocabulary.
std::string detokenize(std::span<const int> ids);

/// Only the character tokens, specials dropped.
std::string plain_text(std::span<const int> ids);

/// Character span [begin, begin + length).
struct Span {
  std::size_t begin = 0;
  std::size_t length = 0;

  std::size_t end() const noexcept { return begin + length; }
  bool operator==(const Span&) const = default;
};

/// Left-to-right scan for the longest substring of length >= 2 accepted by
/// check_validity at each start position. Spans never overlap.
std::vector<Span> detect_entities(std::string_view text);

}  // namespace scm::lm
