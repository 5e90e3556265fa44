//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "scm/core/tensor.hpp"

namespace scm::diffusion {

/// Tables indexed by step t = 0..T. Entry 0 is the noise-free convention
/// (beta 0, alpha_bar 1); steps 1..T are the real diffusion steps.
struct NoiseSchedule {
  std::size_t T = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  /// Original step index of each entry (identity unless respaced).
  std::vector<std::size_t> timestep;
};

/// Linear beta from beta_1 to beta_T. Throws InvalidRange.
NoiseSchedule build_schedule(std::size_t T, double beta_1 = 1e-4, double beta_T = 0.02);

/// Linear schedule with the 1e-4..0.02 endpoints scaled by 1000/T, so a short
/// chain still ends close to pure noise.
NoiseSchedule desk_schedule(std::size_t T = 50);

/// Sub-sequence of `steps` evenly spaced steps of `base` with betas
/// recomputed from the alpha_bar ratios; `timestep` keeps the base indices.
NoiseSchedule respace(const NoiseSchedule& base, std::size_t steps);

/// sqrt(alpha_bar) z0 + sqrt(1 - alpha_bar) eps.
Tensor mix_latent(const Tensor& z0, const Tensor& eps, double alpha_bar);

/// Closed-form q(z_t | z_0). t = 0 returns z0. Throws StepOutOfRange.
Tensor forward_noise(const Tensor& z0, std::size_t t, const Tensor& eps,
                     const NoiseSchedule& schedule);

/// (1 - s) eps_uncond + s eps_cond, which reduces exactly to either branch at
/// s = 0 and s = 1. Throws ShapeMismatch.
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double s);

}  // namespace scm::diffusion
