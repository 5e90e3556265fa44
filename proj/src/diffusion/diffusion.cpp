//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "scm/diffusion/diffusion.hpp"

#include <cmath>

#include "scm/chem/smiles.hpp"
#include "scm/core/error.hpp"

namespace scm::diffusion {

using ag::Tape;
using ag::Var;

Denoiser::Denoiser(const DenoiserConfig& config, Rng& rng)
    : config_(config),
      in_proj_("dit.in_proj", config.latent_width, config.width, rng),
      time1_("dit.time1", config.width, config.width, rng),
      time2_("dit.time2", config.width, config.width, rng),
      cond_proj_("dit.cond_proj", config.cond_width, config.width, rng),
      cond_rows_("dit.cond_rows", config.cond_width, config.length * config.width, rng),
      null_cond_(nn::normal_param("dit.null_cond", {1, config.width}, rng, 0.02)),
      out_norm_("dit.out_norm", config.width),
      out_proj_("dit.out_proj", config.width, config.latent_width, rng),
      text_proj_("dit.text_proj", config.text_width, config.cond_width, rng) {
  for (std::size_t b = 0; b < config.blocks; ++b) {
    blocks_.emplace_back("dit.block" + std::to_string(b), config.width, config.heads,
                         config.mlp_width, false, rng);
  }
}

Var Denoiser::predict(Tape& tape, Var z_t, std::size_t t, std::optional<Var> c) const {
  if (z_t.rows() != config_.length || z_t.cols() != config_.latent_width) {
    throw Error(Errc::ShapeMismatch, "denoiser expects " + std::to_string(config_.length) + "x" +
                                         std::to_string(config_.latent_width) + ", got " +
                                         shape_string(z_t.value().shape()));
  }
  Var temb = time2_(tape, ag::gelu(time1_(tape, tape.constant(nn::sinusoidal_row(
                                                    static_cast<double>(t), config_.width)))));
  Var cemb = c ? cond_proj_(tape, *c) : tape.param(null_cond_);
  Var h = ag::add(in_proj_(tape, z_t), tape.constant(nn::sinusoidal(config_.length, config_.width)));
  h = ag::add(h, ag::add(temb, cemb));
  if (c) {
    // per-row condition offset: one width-sized slice of the projection per latent row
    Var flat = cond_rows_(tape, *c);
    std::vector<Var> rows;
    for (std::size_t r = 0; r < config_.length; ++r)
      rows.push_back(ag::slice_cols(flat, r * config_.width, config_.width));
    h = ag::add(h, ag::concat_rows(rows));
  }
  for (const auto& blk : blocks_) h = blk(tape, h);
  return out_proj_(tape, out_norm_(tape, h));
}

Tensor Denoiser::predict(const Tensor& z_t, std::size_t t, const Condition& c) const {
  Tape tape;
  std::optional<Var> cv;
  if (c) cv = tape.constant(*c);
  return predict(tape, tape.constant(z_t), t, cv).value();
}

Var Denoiser::text_proj(Tape& tape, Var hidden) const {
  return text_proj_(tape, ag::mean_rows(hidden));
}

Tensor Denoiser::text_proj(const Tensor& hidden) const {
  Tape tape;
  return text_proj(tape, tape.constant(hidden)).value();
}

void Denoiser::collect(ParamRefs& out) {
  in_proj_.collect(out);
  time1_.collect(out);
  time2_.collect(out);
  cond_proj_.collect(out);
  cond_rows_.collect(out);
  out.push_back(&null_cond_);
  for (auto& b : blocks_) b.collect(out);
  out_norm_.collect(out);
  out_proj_.collect(out);
  text_proj_.collect(out);
}

Tensor bridge_init(const std::string& source, std::size_t t, const Tensor& eps,
                   const NoiseSchedule& schedule, const SmilesAutoencoder& ae) {
  if (!chem::check_validity(source)) {
    throw Error(Errc::InvalidSmiles, "bridge source '" + source + "' is not a valid SMILES");
  }
  return forward_noise(ae.encode(source), t, eps, schedule);
}

namespace {

Tensor gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  for (double& x : t.values()) x = rng.normal();
  return t;
}

}  // namespace

SampleResult sample_latent(const SampleRequest& req, const NoiseSchedule& base,
                           const Denoiser& denoiser, const SmilesAutoencoder& ae, Rng& rng) {
  const std::size_t L = denoiser.config().length, D = denoiser.config().latent_width;
  const NoiseSchedule sched =
      (req.guidance.steps == 0 || req.guidance.steps == base.T) ? base
                                                                : respace(base, req.guidance.steps);
  if (req.guidance.scale < 0.0) throw Error(Errc::InvalidRange, "guidance scale must be >= 0");

  std::size_t start = sched.T;
  Tensor z;
  if (req.source) {
    // bridge_t is given on the base schedule; find the matching sampler step
    std::size_t base_t = req.bridge_t == 0 ? base.T / 2 : req.bridge_t;
    if (base_t > base.T) throw Error(Errc::StepOutOfRange, "bridge_t beyond the schedule");
    start = 0;
    while (start < sched.T && sched.timestep[start + 1] <= base_t) ++start;
    z = bridge_init(*req.source, sched.timestep[start], gaussian(L, D, rng), base, ae);
  } else {
    z = gaussian(L, D, rng);
  }

  for (std::size_t i = start; i >= 1; --i) {
    const std::size_t t = sched.timestep[i];
    const Tensor eu = denoiser.predict(z, t, std::nullopt);
    const Tensor eps = req.condition ? cfg_combine(eu, denoiser.predict(z, t, req.condition),
                                                   req.guidance.scale)
                                     : eu;
    const double beta = sched.beta[i];
    const double ab = sched.alpha_bar[i];
    const double ab_prev = sched.alpha_bar[i - 1];
    const double coef = beta / std::sqrt(1.0 - ab);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha[i]);
    Tensor next(z.shape());
    for (std::size_t k = 0; k < z.size(); ++k) next[k] = inv_sqrt_alpha * (z[k] - coef * eps[k]);
    if (i > 1) {
      const double sigma = std::sqrt((1.0 - ab_prev) / (1.0 - ab) * beta);
      for (std::size_t k = 0; k < z.size(); ++k) next[k] += sigma * rng.normal();
    }
    z = std::move(next);
  }
  SampleResult out;
  out.smiles = ae.decode(z);
  out.latent = std::move(z);
  return out;
}

std::string sample(const SampleRequest& request, const NoiseSchedule& schedule,
                   const Denoiser& denoiser, const SmilesAutoencoder& ae, Rng& rng) {
  return sample_latent(request, schedule, denoiser, ae, rng).smiles;
}

Var noise_loss(Tape& tape, const Tensor& z0, std::optional<Var> c, const NoiseSchedule& schedule,
               const Denoiser& denoiser, Rng& rng, double null_prob) {
  const std::size_t t = 1 + rng.below(schedule.T);
  const Tensor eps = gaussian(z0.rows(), z0.cols(), rng);
  if (rng.bernoulli(null_prob)) c.reset();
  const Tensor zt = forward_noise(z0, t, eps, schedule);
  return ag::mse(denoiser.predict(tape, tape.constant(zt), t, c), tape.constant(eps));
}

Var diffusion_loss(Tape& tape, const std::vector<DiffusionItem>& batch,
                   const NoiseSchedule& schedule, const Denoiser& denoiser,
                   const SmilesAutoencoder& ae, Rng& rng, double null_prob) {
  if (batch.empty()) throw Error(Errc::EmptyBatch, "diffusion batch is empty");
  std::vector<Var> terms;
  for (const DiffusionItem& item : batch) {
    std::optional<Var> c;
    if (item.condition) c = tape.constant(*item.condition);
    terms.push_back(noise_loss(tape, ae.encode(item.smiles), c, schedule, denoiser, rng, null_prob));
  }
  return ag::scale(ag::add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

}  // namespace scm::diffusion
