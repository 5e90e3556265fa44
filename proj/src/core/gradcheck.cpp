//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/core/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scm/core/rng.hpp"

namespace scm::ag {
namespace {

double evaluate(const ScalarFn& f) {
  Tape tape;
  return f(tape).item();
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarFn& f, const ParamRefs& params,
                                  const GradCheckOptions& options) {
  for (Parameter* p : params) p->value.drop_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  Rng rng(options.seed);
  for (Parameter* p : params) {
    const std::vector<double> analytic =
        p->value.has_grad() ? p->value.grad() : std::vector<double>(p->value.size(), 0.0);
    std::vector<std::size_t> coords(p->value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_param > 0 && coords.size() > options.max_coords_per_param) {
      for (std::size_t i = 0; i < options.max_coords_per_param; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(options.max_coords_per_param);
    }
    for (std::size_t i : coords) {
      const double x = p->value[i];
      p->value[i] = x + options.step;
      const double up = evaluate(f);
      p->value[i] = x - options.step;
      const double down = evaluate(f);
      p->value[i] = x;
      const double numeric = (up - down) / (2.0 * options.step);
      const double denom =
          std::max({std::abs(analytic[i]), std::abs(numeric), options.floor});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      ++report.coords_checked;
      if (rel >= report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_index = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
    p->value.drop_grad();
  }
  return report;
}

}  // namespace scm::ag
