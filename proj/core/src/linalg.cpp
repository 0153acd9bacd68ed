#include "lpcoreset/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace lpcoreset {

WeightVector leverage_scores(const Matrix& a) {
  if (!all_finite(a)) {
    throw InvalidInputError("leverage_scores: non-finite entries");
  }
  const Index n = a.rows();
  Vector tau = Vector::Zero(n);
  if (n == 0 || a.cols() == 0) return WeightVector(2.0, tau);

  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cutoff = std::max(a.rows(), a.cols()) *
                        std::numeric_limits<double>::epsilon() *
                        (sv.size() > 0 ? sv(0) : 0.0);
  Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  if (r == 0) return WeightVector(2.0, tau);

  const auto u = svd.matrixU().leftCols(r);
  tau = u.rowwise().squaredNorm();
  // Round-off can push scores just past 1.
  tau = tau.cwiseMin(1.0).cwiseMax(0.0);
  return WeightVector(2.0, tau);
}

Vector khatri_rao_power(const Vector& a, int k, Index size_cap) {
  if (k < 1) throw InvalidInputError("khatri_rao_power: k must be >= 1");
  if (!all_finite(a)) throw InvalidInputError("khatri_rao_power: non-finite input");
  const Index d = a.size();
  double size = 1.0;
  for (int i = 0; i < k; ++i) {
    size *= static_cast<double>(d);
    if (size > static_cast<double>(size_cap)) {
      throw CapacityError("khatri_rao_power: d^k exceeds size cap");
    }
  }
  Vector out = a;
  for (int i = 1; i < k; ++i) {
    Vector next(out.size() * d);
    for (Index j = 0; j < out.size(); ++j) {
      next.segment(j * d, d) = out(j) * a;
    }
    out.swap(next);
  }
  return out;
}

Matrix khatri_rao_power_rows(const Matrix& a, int k, Index size_cap) {
  if (k < 1) throw InvalidInputError("khatri_rao_power_rows: k must be >= 1");
  Index dk = 1;
  for (int i = 0; i < k; ++i) {
    dk *= a.cols();
    if (dk > size_cap) throw CapacityError("khatri_rao_power_rows: d^k exceeds size cap");
  }
  Matrix out(a.rows(), dk);
  for (Index i = 0; i < a.rows(); ++i) {
    out.row(i) = khatri_rao_power(a.row(i).transpose(), k, size_cap).transpose();
  }
  return out;
}

}  // namespace lpcoreset
