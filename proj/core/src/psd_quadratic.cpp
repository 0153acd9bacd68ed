#include "lpcoreset/psd_quadratic.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lpcoreset {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

PsdQuadratic::PsdQuadratic(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw InvalidInputError("PsdQuadratic: matrix must be square");
  }
  if (!all_finite(m)) {
    throw InvalidInputError("PsdQuadratic: non-finite entries");
  }
  matrix_ = 0.5 * (m + m.transpose());
}

void PsdQuadratic::check_vector(const Vector& a) const {
  if (a.size() != dim()) {
    throw InvalidInputError("PsdQuadratic: vector dimension mismatch");
  }
  if (!all_finite(a)) {
    throw InvalidInputError("PsdQuadratic: non-finite vector");
  }
}

void PsdQuadratic::refresh() const {
  if (!dirty_) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_);
  const Vector& vals = eig.eigenvalues(); // ascending
  lambda_max_ = vals.size() > 0 ? std::max(0.0, vals(vals.size() - 1)) : 0.0;
  const double cutoff = static_cast<double>(dim()) * kEps * lambda_max_;

  Index r = 0;
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) ++r;
  }
  basis_.resize(dim(), r);
  eigenvalues_.resize(r);
  Index j = 0;
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) {
      basis_.col(j) = eig.eigenvectors().col(i);
      eigenvalues_(j) = vals(i);
      ++j;
    }
  }
  dirty_ = false;
}

Index PsdQuadratic::rank() const {
  refresh();
  return eigenvalues_.size();
}

const Matrix& PsdQuadratic::range_basis() const {
  refresh();
  return basis_;
}

const Vector& PsdQuadratic::positive_eigenvalues() const {
  refresh();
  return eigenvalues_;
}

double PsdQuadratic::largest_eigenvalue() const {
  refresh();
  return lambda_max_;
}

double PsdQuadratic::smallest_positive_eigenvalue() const {
  refresh();
  return eigenvalues_.size() > 0 ? eigenvalues_(0) : 0.0;
}

bool PsdQuadratic::in_rowspan(const Vector& a) const {
  check_vector(a);
  refresh();
  const double norm = a.norm();
  if (basis_.cols() == 0) return norm == 0.0;
  const Vector coeffs = basis_.transpose() * a;
  const double residual = (a - basis_ * coeffs).norm();
  return residual <= kTolSpan * std::max(norm, kSpanFloor);
}

std::optional<double> PsdQuadratic::quad_form_pinv(const Vector& a) const {
  check_vector(a);
  refresh();
  const double norm = a.norm();
  if (basis_.cols() == 0) {
    if (norm == 0.0) return 0.0;
    return std::nullopt;
  }
  const Vector coeffs = basis_.transpose() * a;
  const double residual = (a - basis_ * coeffs).norm();
  if (residual > kTolSpan * std::max(norm, kSpanFloor)) {
    return std::nullopt;
  }
  double q = 0.0;
  for (Index i = 0; i < coeffs.size(); ++i) {
    q += coeffs(i) * coeffs(i) / eigenvalues_(i);
  }
  return std::max(q, 0.0);
}

void PsdQuadratic::rank_one_update(const Vector& a, double c) {
  check_vector(a);
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw InvalidInputError("PsdQuadratic: update coefficient must be finite and >= 0");
  }
  if (c == 0.0) return;
  matrix_.selfadjointView<Eigen::Lower>().rankUpdate(a, c);
  matrix_.triangularView<Eigen::StrictlyUpper>() =
      matrix_.transpose().triangularView<Eigen::StrictlyUpper>();
  dirty_ = true;
}

void PsdQuadratic::add_weighted_gram(const Matrix& rows, const Vector& coeffs) {
  if (rows.cols() != dim() || rows.rows() != coeffs.size()) {
    throw InvalidInputError("PsdQuadratic: gram update dimension mismatch");
  }
  if (!all_finite(rows) || !all_finite(coeffs) || (coeffs.array() < 0.0).any()) {
    throw InvalidInputError("PsdQuadratic: gram update requires finite rows and coeffs >= 0");
  }
  matrix_.noalias() += rows.transpose() * coeffs.asDiagonal() * rows;
  matrix_ = 0.5 * (matrix_ + matrix_.transpose());
  dirty_ = true;
}

}  // namespace lpcoreset
