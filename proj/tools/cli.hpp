//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scm::cli {

/// Runs `scicore <args...>` writing results to `out` and diagnostics to
/// `err`. Returns 0 on success, 1 on a validation error, 2 on an internal
/// error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scm::cli
