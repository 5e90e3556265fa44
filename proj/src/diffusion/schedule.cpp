//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "scm/core/error.hpp"

namespace scm::diffusion {
namespace {

void fill_tables(NoiseSchedule& s) {
  s.alpha.assign(s.T + 1, 1.0);
  s.alpha_bar.assign(s.T + 1, 1.0);
  for (std::size_t t = 1; t <= s.T; ++t) {
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                                         shape_string(b.shape()));
  }
}

}  // namespace

NoiseSchedule build_schedule(std::size_t T, double beta_1, double beta_T) {
  if (T == 0 || !(beta_1 > 0.0) || !(beta_1 <= beta_T) || !(beta_T < 1.0)) {
    throw Error(Errc::InvalidRange, "need T >= 1 and 0 < beta_1 <= beta_T < 1, got T=" +
                                        std::to_string(T) + " beta=(" + std::to_string(beta_1) +
                                        ", " + std::to_string(beta_T) + ")");
  }
  NoiseSchedule s;
  s.T = T;
  s.beta.assign(T + 1, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    s.beta[t] = beta_1 + (beta_T - beta_1) * frac;
  }
  s.timestep.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) s.timestep[t] = t;
  fill_tables(s);
  return s;
}

NoiseSchedule desk_schedule(std::size_t T) {
  const double k = 1000.0 / static_cast<double>(T);
  return build_schedule(T, 1e-4 * k, std::min(0.02 * k, 0.999));
}

NoiseSchedule respace(const NoiseSchedule& base, std::size_t steps) {
  if (steps == 0 || steps > base.T) {
    throw Error(Errc::InvalidRange, "respace to " + std::to_string(steps) + " of " +
                                        std::to_string(base.T) + " steps");
  }
  NoiseSchedule s;
  s.T = steps;
  s.timestep.assign(steps + 1, 0);
  s.beta.assign(steps + 1, 0.0);
  s.alpha.assign(steps + 1, 1.0);
  s.alpha_bar.assign(steps + 1, 1.0);
  for (std::size_t i = 1; i <= steps; ++i) {
    // round(i * T / steps), so the last entry is always T
    s.timestep[i] = (i * base.T + steps / 2) / steps;
    if (s.timestep[i] <= s.timestep[i - 1]) s.timestep[i] = s.timestep[i - 1] + 1;
    s.alpha_bar[i] = base.alpha_bar[s.timestep[i]];
    s.alpha[i] = s.alpha_bar[i] / s.alpha_bar[i - 1];
    s.beta[i] = 1.0 - s.alpha[i];
  }
  return s;
}

Tensor mix_latent(const Tensor& z0, const Tensor& eps, double alpha_bar) {
  require_same_shape(z0, eps, "forward noise");
  const double a = std::sqrt(alpha_bar);
  const double b = std::sqrt(1.0 - alpha_bar);
  Tensor out(z0.shape());
  for (std::size_t i = 0; i < z0.size(); ++i) out[i] = a * z0[i] + b * eps[i];
  return out;
}

Tensor forward_noise(const Tensor& z0, std::size_t t, const Tensor& eps,
                     const NoiseSchedule& schedule) {
  if (t > schedule.T) {
    throw Error(Errc::StepOutOfRange,
                "step " + std::to_string(t) + " outside 0.." + std::to_string(schedule.T));
  }
  return mix_latent(z0, eps, schedule.alpha_bar[t]);
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double s) {
  require_same_shape(eps_uncond, eps_cond, "guidance");
  Tensor out(eps_uncond.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - s) * eps_uncond[i] + s * eps_cond[i];
  }
  return out;
}

}  // namespace scm::diffusion
