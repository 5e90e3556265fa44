//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/core/error.hpp"

namespace scm {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonScalarLoss: return "NonScalarLoss";
    case Errc::UnbalancedParenthesis: return "UnbalancedParenthesis";
    case Errc::UnclosedRing: return "UnclosedRing";
    case Errc::UnknownAtomSymbol: return "UnknownAtomSymbol";
    case Errc::ValenceViolation: return "ValenceViolation";
    case Errc::InvalidSyntax: return "InvalidSyntax";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::ConformerMismatch: return "ConformerMismatch";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::VocabOverflow: return "VocabOverflow";
    case Errc::TooLong: return "TooLong";
    case Errc::InvalidSmiles: return "InvalidSmiles";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::StepOutOfRange: return "StepOutOfRange";
    case Errc::UnknownRole: return "UnknownRole";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::EmptyLibrary: return "EmptyLibrary";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::UnknownTaskType: return "UnknownTaskType";
    case Errc::FrozenAllParams: return "FrozenAllParams";
    case Errc::ConfigError: return "ConfigError";
    case Errc::CheckpointError: return "CheckpointError";
    case Errc::CorpusParseError: return "CorpusParseError";
    case Errc::UngroupedMetric: return "UngroupedMetric";
    case Errc::EmptyList: return "EmptyList";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::NonScalarLoss:
    case Errc::ShapeMismatch:
    case Errc::WidthMismatch:
    case Errc::ConformerMismatch:
      return false;
    default:
      return true;
  }
}

}  // namespace scm
