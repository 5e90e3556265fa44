//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>

// Row-major dense products. Each output element accumulates its inner
// products in ascending index order, independent of the matrix extents, so a
// row of the result is bit-identical whether or not other rows are present.
namespace scm::kernels {

/// C = A(m,k) * B(k,n)
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
          std::size_t n);
/// C(m,k) += A(m,n) * B(k,n)^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k);
/// C(k,n) += A(m,k)^T * B(m,n)
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);

}  // namespace scm::kernels
