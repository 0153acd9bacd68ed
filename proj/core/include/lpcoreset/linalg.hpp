#pragma once

#include "lpcoreset/common.hpp"
#include "lpcoreset/weight_vector.hpp"

namespace lpcoreset {

/// Statistical leverage scores tau_i = a_i^T (A^T A)^- a_i via thin SVD.
/// Zero rows get 0; the scores sum to rank(A).
WeightVector leverage_scores(const Matrix& a);

/// k-fold Khatri-Rao (tensor) power of a single row: a^{(x)k} in R^{d^k},
/// satisfying <a^{(x)k}, x^{(x)k}> = <a, x>^k. Throws CapacityError when
/// d^k exceeds size_cap.
Vector khatri_rao_power(const Vector& a, int k, Index size_cap = Index(1) << 22);

/// Row-wise Khatri-Rao power of a matrix (n x d^k).
Matrix khatri_rao_power_rows(const Matrix& a, int k, Index size_cap = Index(1) << 22);

}  // namespace lpcoreset
