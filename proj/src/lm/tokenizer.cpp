//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/lm/tokenizer.hpp"

#include <array>
#include <cstdio>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"

namespace scm::lm {
namespace {

constexpr std::array<std::string_view, kSpecialCount> kMarkers{
    "<pad>", "<bos>", "<eos>", "<mol>", "</mol>", "<d:perceive>", "<d:generate>", "<d:react>"};

}  // namespace

bool is_dispatch(int id) noexcept { return id == kPerceive || id == kGenerate || id == kReact; }

bool is_char_token(int id) noexcept { return id >= kSpecialCount && id < kVocabSize; }

std::string_view marker(int id) {
  if (id < 0 || id >= kSpecialCount) {
    throw Error(Errc::VocabOverflow, "id " + std::to_string(id) + " is not a special token");
  }
  return kMarkers[static_cast<std::size_t>(id)];
}

std::vector<int> tokenize(std::string_view text) {
  std::vector<int> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    if (text[i] == '<') {
      for (int s = 0; s < kSpecialCount; ++s) {
        if (text.substr(i).starts_with(kMarkers[s])) {
          out.push_back(s);
          i += kMarkers[s].size();
          matched = true;
          break;
        }
      }
    }
    if (matched) continue;
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 32 || c > 126) {
      char hex[8];
      std::snprintf(hex, sizeof hex, "0x%02x", c);
      throw Error(Errc::VocabOverflow,
                  std::string("byte ") + hex + " at offset " + std::to_string(i) +
                      " is outside the vocabulary");
    }
    out.push_back(kSpecialCount + (c - 32));
    ++i;
  }
  return out;
}

std::string detokenize(std::span<const int> ids) {
  std::string out;
  for (int id : ids) {
    if (id >= 0 && id < kSpecialCount) {
      out += kMarkers[static_cast<std::size_t>(id)];
    } else if (is_char_token(id)) {
      out += static_cast<char>(id - kSpecialCount + 32);
    } else {
      throw Error(Errc::VocabOverflow, "id " + std::to_string(id) + " outside vocabulary of " +
                                           std::to_string(kVocabSize));
    }
  }
  return out;
}

std::string plain_text(std::span<const int> ids) {
  std::string out;
  for (int id : ids) {
    if (is_char_token(id)) out += static_cast<char>(id - kSpecialCount + 32);
  }
  return out;
}

std::vector<Span> detect_entities(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i + 1 < text.size()) {
    std::size_t best = 0;
    for (std::size_t len = text.size() - i; len >= 2; --len) {
      if (chem::check_validity(text.substr(i, len))) {
        best = len;
        break;
      }
    }
    if (best == 0) {
      ++i;
      continue;
    }
    spans.push_back({i, best});
    i += best;
  }
  return spans;
}

}  // namespace scm::lm
