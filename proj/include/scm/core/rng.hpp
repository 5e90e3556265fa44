//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>

namespace scm {

/// Splittable counter-based generator. Output i of a stream is
/// mix64(key + i * gamma); split() derives an independent key from the next
/// output, so child streams never share state with the parent.
///
/// Gaussian draws use Box-Muller on two uniforms with no cached spare, which
/// keeps every draw a pure function of (key, counter).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  Rng split() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter, int) noexcept
      : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace scm
