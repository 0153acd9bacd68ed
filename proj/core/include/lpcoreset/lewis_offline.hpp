#pragma once

#include <optional>
#include <vector>

#include "lpcoreset/common.hpp"
#include "lpcoreset/weight_vector.hpp"

namespace lpcoreset {

struct FixedPointInfo {
  int iterations = 0;
  double residual = 0.0;
};

/// lp Lewis weights of A for p in (0,4) by fixed-point iteration, optionally
/// regularized against a PSD matrix M ("batch online" weights): the returned
/// w satisfies w_i = [a_i^T (A^T W^{1-2/p} A + M)^- a_i]^{p/2} up to the
/// relative residual tol. Zero rows get weight 0. With M = 0 the weights sum
/// to rank(A).
///
/// Throws ConfigError for p outside (0,4) and ConvergenceError (carrying the
/// last residual) when max_iters is exhausted.
WeightVector lewis_fixed_point(const Matrix& a, double p,
                               const Matrix* regularizer = nullptr,
                               double tol = 1e-10, int max_iters = 100,
                               FixedPointInfo* info = nullptr);

/// Regularized lp Lewis weights for p >= 2 via the damped fixed point of the
/// determinant-maximization characterization, with M = L^T L given by rows of
/// its square root. The returned w satisfies
///   w_i = (p/2)^{(p/2)/(1-2/p)} (a_i^T (A^T W^{1-2/p} A + M)^- a_i)^{p/2}
/// up to residual tol, and sums to at most (p/2)^{1/(1-2/p)} d.
/// p == 2 delegates to lewis_fixed_point (the prefactor degenerates).
WeightVector lewis_convex(const Matrix& a, const Matrix& sqrt_regularizer,
                          double p, double tol = 1e-8, int max_iters = 2000,
                          FixedPointInfo* info = nullptr);

/// lp sensitivity certificates for p >= 4 through the Khatri-Rao power: the
/// l_{p/k} Lewis weights of A^{(x)k} for k = floor(p/4)+1 (so 2 <= p/k < 4),
/// reinterpreted as per-row certificates for A. Throws CapacityError when
/// d^k exceeds size_cap.
WeightVector lewis_highp(const Matrix& a, double p, double tol = 1e-10,
                         Index size_cap = Index(1) << 22);

/// One-sided weights usable as sampling certificates for any p > 0:
/// fixed point on (0,4), convex program on [4,inf) with the tensor trick as
/// fallback if the damped iteration stalls.
WeightVector one_sided_weights(const Matrix& a, double p, double tol = 1e-10);

struct OneSidedReport {
  bool pass = false;
  Vector lhs;                    // w_i
  Vector rhs;                    // gamma^{p/2} [a_i^T Q^- a_i]^{p/2}
  std::vector<Index> failed_rows;
  double worst_margin = 0.0;     // min_i (lhs - rhs); negative on failure
};

/// Checks the gamma-one-sided Lewis property w_i >= gamma^{p/2} rhs_i - tol,
/// row by row, against the quadratic built from w itself.
OneSidedReport verify_one_sided(const Matrix& a, const WeightVector& w,
                                double gamma, double tol = 1e-8);

/// Quadratic A^T diag(w^{1-2/p}) A (+ M), skipping zero-weight rows.
Matrix lewis_quadratic(const Matrix& a, const Vector& w, double p,
                       const Matrix* regularizer = nullptr);

/// a_i^T Q^- a_i for every row of A against a shared eigendecomposition.
/// Rows outside rowspan(Q) map to +inf.
Vector quad_forms_pinv_rows(const Matrix& q, const Matrix& a);

}  // namespace lpcoreset
