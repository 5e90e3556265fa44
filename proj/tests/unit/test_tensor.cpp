//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "scm/core/error.hpp"
#include "scm/core/kernels.hpp"
#include "scm/core/tensor.hpp"

using namespace scm;

TEST(Tensor, ShapeAndData) {
  Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_EQ(shape_string(t.shape()), "[2,3]");
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), Error);
  EXPECT_THROW(t.reshaped({4, 2}), Error);
  EXPECT_EQ(t.reshaped({3, 2})(2, 1), 6.0);
}

TEST(Tensor, GradientSlotMatchesShape) {
  Tensor t = Tensor::matrix(2, 2, 1.0);
  EXPECT_FALSE(t.has_grad());
  EXPECT_EQ(t.grad().size(), 4u);
  for (double g : t.grad()) EXPECT_EQ(g, 0.0);
  t.grad()[1] = 3.0;
  t.zero_grad();
  EXPECT_EQ(t.grad()[1], 0.0);
}

TEST(Kernels, GemmAgainstNaive) {
  const std::size_t m = 5, k = 7, n = 3;
  std::vector<double> a(m * k), b(k * n), c(m * n), ref(m * n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.1 * static_cast<double>(i % 9) - 0.4;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.07 * static_cast<double>(i % 5) - 0.1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) ref[i * n + j] += a[i * k + p] * b[p * n + j];
  kernels::gemm(a.data(), b.data(), c.data(), m, k, n);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-14);
}
