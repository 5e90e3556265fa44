//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scm {

enum class Errc {
  // tensors and autograd
  ShapeMismatch,
  NonScalarLoss,
  // SMILES
  UnbalancedParenthesis,
  UnclosedRing,
  UnknownAtomSymbol,
  ValenceViolation,
  InvalidSyntax,
  // encoders and models
  WidthMismatch,
  ConformerMismatch,
  EmptyGraph,
  VocabOverflow,
  TooLong,
  InvalidSmiles,
  InvalidRange,
  StepOutOfRange,
  UnknownRole,
  IndexOutOfRange,
  EmptyMask,
  EmptyLibrary,
  OutOfRange,
  EmptyBatch,
  // training
  UnknownTaskType,
  FrozenAllParams,
  ConfigError,
  CheckpointError,
  // harness
  CorpusParseError,
  UngroupedMetric,
  EmptyList,
  LengthMismatch,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

/// True for errors caused by bad user input (exit code 1 in the CLI).
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Malformed SMILES. `offset` is the zero-based character offset of the
/// offending character.
class SmilesError : public Error {
 public:
  SmilesError(Errc code, std::size_t offset, const std::string& message)
      : Error(code, message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Line-numbered failure while reading a corpus or config file (1-based).
class LineError : public Error {
 public:
  LineError(Errc code, std::size_t line, const std::string& reason)
      : Error(code, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace scm
