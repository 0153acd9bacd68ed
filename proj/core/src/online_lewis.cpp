#include "lpcoreset/online_lewis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

namespace lpcoreset {

namespace {

void write_u64(std::ostream& out, uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw IoError("snapshot: truncated read");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& in) {
  const uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

OnlineLewisState::OnlineLewisState(Index dim, double p)
    : p_(p), quadratic_(dim), gram_(dim) {
  if (!(p > 0.0)) throw ConfigError("OnlineLewisState: p must be positive");
  if (dim < 1) throw ConfigError("OnlineLewisState: dim must be >= 1");
}

double OnlineLewisState::peek_uncapped(const Vector& a) const {
  const auto form = quadratic_.quad_form_pinv(a);
  if (!form.has_value()) return std::numeric_limits<double>::infinity();
  return std::pow(*form, p_ / 2.0);
}

double OnlineLewisState::step(const Vector& a) {
  if (a.size() != dim()) throw InvalidInputError("OnlineLewisState: dimension mismatch");
  if (!all_finite(a)) throw InvalidInputError("OnlineLewisState: non-finite row");

  double w;
  if (a.norm() == 0.0) {
    w = 0.0;
  } else {
    const auto form = quadratic_.quad_form_pinv(a);
    w = form.has_value() ? std::min(std::pow(*form, p_ / 2.0), 1.0) : 1.0;
    quadratic_.rank_one_update(a, std::pow(w, 1.0 - 2.0 / p_));
    gram_.rank_one_update(a, 1.0);
  }
  rows_seen_ += 1;
  weight_sum_ += w;
  sq_frobenius_ += a.squaredNorm();
  if (rows_seen_ - rows_at_refresh_ >= dim()) refresh_sigma_floor();
  return w;
}

void OnlineLewisState::refresh_sigma_floor() const {
  const double lam = gram_.smallest_positive_eigenvalue();
  if (lam > 0.0) sigma_min_floor_ = std::min(sigma_min_floor_, std::sqrt(lam));
  rows_at_refresh_ = rows_seen_;
}

double OnlineLewisState::sigma_min_floor() const {
  refresh_sigma_floor();
  return sigma_min_floor_;
}

double OnlineLewisState::kappa_online_estimate() const {
  const double floor = sigma_min_floor();
  if (!std::isfinite(floor) || floor == 0.0) return 1.0;
  return std::max(sigma_max_bound() / floor, 1.0);
}

void OnlineLewisState::save_snapshot(std::ostream& out) const {
  write_f64(out, p_);
  write_u64(out, static_cast<uint64_t>(rows_seen_));
  write_u64(out, static_cast<uint64_t>(rank()));
  write_f64(out, weight_sum_);
  const Matrix& m = quadratic_.matrix();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) write_f64(out, m(i, j));
  }
  if (!out) throw IoError("snapshot: write failed");
}

OnlineLewisState OnlineLewisState::load_snapshot(std::istream& in) {
  const double p = read_f64(in);
  const uint64_t rows = read_u64(in);
  const uint64_t rank = read_u64(in);
  const double weight_sum = read_f64(in);

  // The header carries no explicit dimension; the quadratic fills the rest of
  // the stream.
  std::vector<double> entries;
  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(start);
  const auto bytes = static_cast<long long>(end - start);
  if (bytes < 0 || bytes % 8 != 0) throw IoError("snapshot: malformed payload");
  const long long count = bytes / 8;
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (d * d != count || d < 1) throw IoError("snapshot: payload is not a square matrix");

  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = read_f64(in);
  }
  OnlineLewisState state(d, p);
  state.quadratic_ = PsdQuadratic(m);
  state.rows_seen_ = static_cast<Index>(rows);
  state.weight_sum_ = weight_sum;
  // The condition-number trackers are diagnostics and restart conservatively.
  state.gram_ = PsdQuadratic(d);
  state.sq_frobenius_ = state.quadratic_.largest_eigenvalue();
  if (state.quadratic_.rank() != static_cast<Index>(rank)) {
    throw IoError("snapshot: rank does not match the stored quadratic");
  }
  return state;
}

std::vector<Vector> flatten_row(const Vector& a, double beta, double p) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ConfigError("flatten_row: beta must be in (0,1]");
  }
  if (!(p > 0.0)) throw ConfigError("flatten_row: p must be positive");
  const auto k = static_cast<Index>(std::ceil(1.0 / beta));
  std::vector<Vector> out;
  out.reserve(k);
  const Vector scaled = a / std::pow(static_cast<double>(k), 1.0 / p);
  for (Index i = 0; i < k; ++i) out.push_back(scaled);
  return out;
}

FlattenAdapter::FlattenAdapter(Index dim, double p, double beta)
    : state_(dim, p), beta_(beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ConfigError("FlattenAdapter: beta must be in (0,1]");
  }
}

std::vector<Vector> FlattenAdapter::process(const Vector& a) {
  const double uncapped = state_.peek_uncapped(a);
  std::vector<Vector> rows;
  if (!std::isfinite(uncapped) || a.norm() == 0.0) {
    rows.push_back(a);  // rank-increasing (weight 1 by definition) or zero
  } else {
    // Splitting into k >= estimate/beta copies caps each copy at beta, even
    // for rows whose capped weight would have been 1.
    const double beta_eff = std::min(beta_ / std::max(uncapped, beta_), 1.0);
    rows = flatten_row(a, beta_eff, state_.p());
  }
  for (const Vector& r : rows) state_.step(r);
  return rows;
}

SampledEstimatorState::SampledEstimatorState(Index dim, double p, double alpha,
                                             CounterRng rng)
    : p_(p), alpha_(alpha), quadratic_(dim), rng_(rng) {
  if (!(p > 0.0 && p < 2.0)) {
    throw ConfigError("SampledEstimatorState: p must be in (0,2)");
  }
  if (!(alpha > 0.0)) throw ConfigError("SampledEstimatorState: alpha must be positive");
}

EstimateStep SampledEstimatorState::step(const Vector& a) {
  if (a.size() != quadratic_.dim()) {
    throw InvalidInputError("SampledEstimatorState: dimension mismatch");
  }
  if (!all_finite(a)) throw InvalidInputError("SampledEstimatorState: non-finite row");

  EstimateStep result;
  rows_seen_ += 1;
  if (a.norm() == 0.0) {
    return result;  // zero rows carry no lp mass
  }

  const auto form = quadratic_.quad_form_pinv(a);
  const bool rank_increasing = !form.has_value();
  result.estimate = rank_increasing ? 1.0 : std::pow(*form, p_ / 2.0);
  // Rank-increasing rows are force-kept so the stored rowspan tracks the
  // stream's rowspan.
  result.probability =
      rank_increasing ? 1.0 : std::min(result.estimate / alpha_, 1.0);
  estimate_sum_ += result.estimate;

  if (rng_.next_coin(result.probability)) {
    result.kept = true;
    const Vector stored_row = a / std::sqrt(result.probability);
    quadratic_.rank_one_update(stored_row,
                               std::pow(result.estimate, 1.0 - 2.0 / p_));
    stored_.push_back(stored_row);
  }
  return result;
}

Vector online_sensitivity_bound(const WeightVector& w) {
  const double expo = std::max(0.0, w.p / 2.0 - 1.0);
  const double factor = expo == 0.0 ? 1.0 : std::pow(w.weights.sum(), expo);
  return factor * w.weights;
}

double kappa_online(const Matrix& a) {
  const Index d = a.cols();
  Matrix gram = Matrix::Zero(d, d);
  double max_inv_sigma = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (Index i = 0; i < a.rows(); ++i) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.row(i).transpose(), 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        Matrix(gram.selfadjointView<Eigen::Lower>()), Eigen::EigenvaluesOnly);
    const Vector& vals = eig.eigenvalues();
    const double lam_max = std::max(0.0, vals(d - 1));
    const double cutoff = static_cast<double>(d) * eps * lam_max;
    double lam_min_pos = 0.0;
    for (Index j = 0; j < d; ++j) {
      if (vals(j) > cutoff && vals(j) > 0.0) {
        lam_min_pos = vals(j);
        break;
      }
    }
    if (lam_min_pos > 0.0) {
      max_inv_sigma = std::max(max_inv_sigma, 1.0 / std::sqrt(lam_min_pos));
    }
  }
  if (max_inv_sigma == 0.0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      Matrix(gram.selfadjointView<Eigen::Lower>()), Eigen::EigenvaluesOnly);
  const double sigma_max = std::sqrt(std::max(0.0, eig.eigenvalues()(d - 1)));
  return std::max(sigma_max * max_inv_sigma, 1.0);
}

WeightVector online_lewis_weights(const Matrix& a, double p) {
  OnlineLewisState state(a.cols(), p);
  Vector w(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    w(i) = state.step(a.row(i).transpose());
  }
  return WeightVector(p, w);
}

}  // namespace lpcoreset
