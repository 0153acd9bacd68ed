#include "lpcoreset/lewis_offline.hpp"

#include "lpcoreset/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lpcoreset {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Pinv {
  Matrix basis;       // d x r
  Vector inv_eigs;    // r
  double span_cutoff; // residual threshold scale
};

Pinv pinv_of(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  const Vector& vals = eig.eigenvalues();
  const double lam_max = vals.size() > 0 ? std::max(0.0, vals(vals.size() - 1)) : 0.0;
  const double cutoff = static_cast<double>(q.rows()) * kEps * lam_max;
  Index r = 0;
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) ++r;
  }
  Pinv out;
  out.basis.resize(q.rows(), r);
  out.inv_eigs.resize(r);
  Index j = 0;
  for (Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) {
      out.basis.col(j) = eig.eigenvectors().col(i);
      out.inv_eigs(j) = 1.0 / vals(i);
      ++j;
    }
  }
  out.span_cutoff = 1e-9;
  return out;
}

// Quadratic forms for all rows at once: q_i = || diag(inv_eigs)^{1/2} V^T a_i ||^2,
// +inf for rows with a projection residual off the span.
Vector quad_forms(const Pinv& pinv, const Matrix& a) {
  const Index n = a.rows();
  Vector out(n);
  if (pinv.basis.cols() == 0) {
    for (Index i = 0; i < n; ++i) {
      out(i) = a.row(i).norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return out;
  }
  const Matrix proj = a * pinv.basis;                  // n x r
  const Matrix recon = proj * pinv.basis.transpose();  // n x d
  const Vector scaled = (proj.array().square().matrix() * pinv.inv_eigs).rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    const double norm = a.row(i).norm();
    const double residual = (a.row(i) - recon.row(i)).norm();
    if (residual > pinv.span_cutoff * std::max(norm, 1e-300)) {
      out(i) = std::numeric_limits<double>::infinity();
    } else {
      out(i) = std::max(scaled(i), 0.0);
    }
  }
  return out;
}

void validate_matrix(const Matrix& a, const char* who) {
  if (!all_finite(a)) {
    throw InvalidInputError(std::string(who) + ": non-finite entries");
  }
}

}  // namespace

Matrix lewis_quadratic(const Matrix& a, const Vector& w, double p,
                       const Matrix* regularizer) {
  const double expo = 1.0 - 2.0 / p;
  Matrix q = regularizer ? Matrix(*regularizer) : Matrix(Matrix::Zero(a.cols(), a.cols()));
  Vector coeffs(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    coeffs(i) = w(i) > 0.0 ? std::pow(w(i), expo) : 0.0;
  }
  q.noalias() += a.transpose() * coeffs.asDiagonal() * a;
  return 0.5 * (q + q.transpose());
}

Vector quad_forms_pinv_rows(const Matrix& q, const Matrix& a) {
  return quad_forms(pinv_of(q), a);
}

WeightVector lewis_fixed_point(const Matrix& a, double p,
                               const Matrix* regularizer, double tol,
                               int max_iters, FixedPointInfo* info) {
  if (!(p > 0.0 && p < 4.0)) {
    throw ConfigError("lewis_fixed_point: p must be in (0,4)");
  }
  validate_matrix(a, "lewis_fixed_point");
  if (regularizer && (regularizer->rows() != a.cols() || regularizer->cols() != a.cols())) {
    throw InvalidInputError("lewis_fixed_point: regularizer must be d x d");
  }

  const Index n = a.rows();
  Vector w = Vector::Zero(n);
  std::vector<Index> active;
  for (Index i = 0; i < n; ++i) {
    if (a.row(i).norm() > 0.0) {
      active.push_back(i);
      w(i) = 1.0;
    }
  }
  if (active.empty()) {
    if (info) *info = {0, 0.0};
    return WeightVector(p, w);
  }

  double residual = std::numeric_limits<double>::infinity();
  int iters = 0;
  for (int t = 0; t < max_iters; ++t) {
    const Matrix q = lewis_quadratic(a, w, p, regularizer);
    const Vector forms = quad_forms(pinv_of(q), a);
    residual = 0.0;
    Vector next = w;
    for (Index i : active) {
      const double mapped = std::pow(forms(i), p / 2.0);
      residual = std::max(residual, std::abs(w(i) - mapped) / std::max(w(i), tol));
      next(i) = mapped;
    }
    iters = t + 1;
    if (residual <= tol) {
      // w itself carries the certified residual; next would need re-checking.
      if (info) *info = {iters, residual};
      return WeightVector(p, w);
    }
    w = next;
  }
  throw ConvergenceError("lewis_fixed_point: no convergence within max_iters", residual);
}

WeightVector lewis_convex(const Matrix& a, const Matrix& sqrt_regularizer,
                          double p, double tol, int max_iters,
                          FixedPointInfo* info) {
  if (!(p >= 2.0)) {
    throw ConfigError("lewis_convex: p must be >= 2");
  }
  validate_matrix(a, "lewis_convex");
  if (sqrt_regularizer.size() > 0 && sqrt_regularizer.cols() != a.cols()) {
    throw InvalidInputError("lewis_convex: sqrt_regularizer column count mismatch");
  }

  Matrix m = Matrix::Zero(a.cols(), a.cols());
  if (sqrt_regularizer.size() > 0) {
    m = sqrt_regularizer.transpose() * sqrt_regularizer;
  }
  if (p == 2.0) {
    return lewis_fixed_point(a, 2.0, &m, tol, std::max(max_iters, 100), info);
  }

  const double prefactor = std::pow(p / 2.0, (p / 2.0) / (1.0 - 2.0 / p));
  const Index n = a.rows();
  Vector w = Vector::Zero(n);
  std::vector<Index> active;
  for (Index i = 0; i < n; ++i) {
    if (a.row(i).norm() > 0.0) {
      active.push_back(i);
      w(i) = 1.0;
    }
  }
  if (active.empty()) {
    if (info) *info = {0, 0.0};
    return WeightVector(p, w);
  }

  double eta = std::min(1.0, 1.0 / (p / 2.0 - 1.0));
  double residual = std::numeric_limits<double>::infinity();
  double best_residual = residual;
  int since_improvement = 0;
  for (int t = 0; t < max_iters; ++t) {
    const Matrix q = lewis_quadratic(a, w, p, &m);
    const Vector forms = quad_forms(pinv_of(q), a);
    residual = 0.0;
    Vector mapped(n);
    for (Index i : active) {
      mapped(i) = prefactor * std::pow(forms(i), p / 2.0);
      residual = std::max(residual, std::abs(w(i) - mapped(i)) / std::max(w(i), tol));
    }
    if (residual <= tol) {
      if (info) *info = {t + 1, residual};
      return WeightVector(p, w);
    }
    if (residual < 0.999 * best_residual) {
      best_residual = residual;
      since_improvement = 0;
    } else if (++since_improvement >= 20) {
      eta *= 0.5;
      since_improvement = 0;
      if (eta < 1e-3) {
        throw ConvergenceError("lewis_convex: damped iteration stalled", residual);
      }
    }
    for (Index i : active) {
      w(i) = std::pow(w(i), 1.0 - eta) * std::pow(mapped(i), eta);
    }
  }
  throw ConvergenceError("lewis_convex: no convergence within max_iters", residual);
}

WeightVector lewis_highp(const Matrix& a, double p, double tol, Index size_cap) {
  if (!(p >= 4.0)) {
    throw ConfigError("lewis_highp: p must be >= 4");
  }
  const int k = static_cast<int>(std::floor(p / 4.0)) + 1;
  const Matrix ak = khatri_rao_power_rows(a, k, size_cap);
  WeightVector w = lewis_fixed_point(ak, p / k, nullptr, tol, 200);
  w.p = p;
  return w;
}

WeightVector one_sided_weights(const Matrix& a, double p, double tol) {
  if (p > 0.0 && p < 4.0) {
    return lewis_fixed_point(a, p, nullptr, tol, 200);
  }
  try {
    return lewis_convex(a, Matrix(), p, std::max(tol, 1e-8));
  } catch (const ConvergenceError&) {
    return lewis_highp(a, p, tol);
  }
}

OneSidedReport verify_one_sided(const Matrix& a, const WeightVector& w,
                                double gamma, double tol) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("verify_one_sided: gamma must be in (0,1]");
  }
  if (w.size() != a.rows()) {
    throw InvalidInputError("verify_one_sided: weight length mismatch");
  }
  const Matrix q = lewis_quadratic(a, w.weights, w.p, nullptr);
  const Vector forms = quad_forms(pinv_of(q), a);

  OneSidedReport report;
  report.lhs = w.weights;
  report.rhs.resize(a.rows());
  report.worst_margin = std::numeric_limits<double>::infinity();
  const double gpow = std::pow(gamma, w.p / 2.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const double rhs = std::isfinite(forms(i))
                           ? gpow * std::pow(forms(i), w.p / 2.0)
                           : std::numeric_limits<double>::infinity();
    report.rhs(i) = rhs;
    const double margin = w.weights(i) - rhs;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!(margin >= -tol)) {
      report.failed_rows.push_back(i);
    }
  }
  report.pass = report.failed_rows.empty();
  return report;
}

}  // namespace lpcoreset
