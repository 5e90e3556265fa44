//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "scm/core/autograd.hpp"

namespace scm::ag {

/// Builds a scalar loss on the given tape. Must be deterministic: the check
/// calls it once for the analytic gradient and twice per probed coordinate.
using ScalarFn = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double step = 1e-5;
  /// Probe at most this many coordinates per parameter (0 probes all).
  std::size_t max_coords_per_param = 0;
  /// Denominator floor of the relative error, so coordinates whose gradient
  /// is ~0 are compared in absolute terms.
  double floor = 1e-4;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares backward() against central differences (f(x+h) - f(x-h)) / 2h on
/// every probed coordinate of params. Parameter values are restored.
GradCheckReport finite_diff_check(const ScalarFn& f, const ParamRefs& params,
                                  const GradCheckOptions& options = {});

}  // namespace scm::ag
