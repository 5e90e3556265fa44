//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "scm/core/tensor.hpp"

namespace scm {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global gradient-norm clip; 0 disables clipping.
  double clip_norm = 1.0;
};

/// Adam over a fixed parameter list. Parameters outside the list are never
/// written, which is how freeze sets are enforced.
class Adam {
 public:
  Adam(ParamRefs params, AdamConfig config);

  void zero_grad();
  /// One update at learning rate lr; returns the pre-clip gradient norm.
  double step(double lr);
  double step() { return step(config_.lr); }

  const ParamRefs& params() const noexcept { return params_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  ParamRefs params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

/// Cosine decay from lr to lr * floor_ratio over total steps.
double cosine_lr(double lr, std::size_t step, std::size_t total, double floor_ratio = 0.1);

}  // namespace scm
