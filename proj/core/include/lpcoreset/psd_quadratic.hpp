#pragma once

#include <optional>

#include "lpcoreset/common.hpp"

namespace lpcoreset {

/// Symmetric positive semidefinite quadratic with pseudoinverse queries.
///
/// Maintains M exactly under rank-one updates (O(d^2) per update) and keeps a
/// lazily refreshed symmetric eigendecomposition for pseudoinverse quadratic
/// forms, rank queries and rowspan tests. Rank decisions use the cutoff
/// d * eps * lambda_max; rowspan membership requires the projection residual
/// onto the nonzero eigenspace to be at most tol_span * max(||a||, floor).
class PsdQuadratic {
public:
  static constexpr double kTolSpan = 1e-9;
  static constexpr double kSpanFloor = 1e-300;

  explicit PsdQuadratic(Index dim) : matrix_(Matrix::Zero(dim, dim)) {}

  /// Wrap an existing symmetric PSD matrix. Symmetrizes to tolerance and
  /// rejects non-finite input.
  explicit PsdQuadratic(const Matrix& m);

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }

  /// Rank of the nonzero eigenspace.
  Index rank() const;

  /// Orthonormal basis of the row space (d x rank).
  const Matrix& range_basis() const;

  /// Eigenvalues above the rank cutoff, ascending.
  const Vector& positive_eigenvalues() const;

  /// a^T M^- a if a lies in rowspan(M), otherwise nullopt.
  /// Clamped below at 0. Throws InvalidInputError on non-finite input.
  std::optional<double> quad_form_pinv(const Vector& a) const;

  bool in_rowspan(const Vector& a) const;

  /// M <- M + c * a a^T, c >= 0. Throws InvalidInputError otherwise.
  void rank_one_update(const Vector& a, double c);

  /// M <- M + B^T diag(c) B for rows of B (batch of rank-one updates).
  void add_weighted_gram(const Matrix& rows, const Vector& coeffs);

  double largest_eigenvalue() const;

  /// Smallest eigenvalue of the nonzero eigenspace; 0 for the zero matrix.
  double smallest_positive_eigenvalue() const;

private:
  void refresh() const;
  void check_vector(const Vector& a) const;

  Matrix matrix_;
  // Lazy eigendecomposition cache; refreshed on first query after an update.
  mutable bool dirty_ = true;
  mutable Matrix basis_;       // d x r, orthonormal columns
  mutable Vector eigenvalues_; // r, ascending, all > cutoff
  mutable double lambda_max_ = 0.0;
};

}  // namespace lpcoreset
