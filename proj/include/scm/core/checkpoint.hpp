//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "scm/core/tensor.hpp"

// Named-tensor checkpoint archive. Layout:
//
//   scicore-checkpoint 1
//   tensors <count>
//   <name> f64 <rank> <dim0> ... <dimN>     (one line per tensor)
//   end
//   <little-endian float64 payloads, manifest order>
namespace scm::checkpoint {

using TensorMap = std::map<std::string, Tensor>;

void save(const std::filesystem::path& path, const ParamRefs& params);
TensorMap load(const std::filesystem::path& path);

/// Copies matching tensors into params. Every param must be present with the
/// same shape unless allow_missing is set.
void restore(const TensorMap& tensors, const ParamRefs& params, bool allow_missing = false);

}  // namespace scm::checkpoint
