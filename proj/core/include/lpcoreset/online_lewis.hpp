#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <vector>

#include "lpcoreset/common.hpp"
#include "lpcoreset/psd_quadratic.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/weight_vector.hpp"

namespace lpcoreset {

/// Deterministic online lp Lewis weights: on arrival of row a_i, the weight is
/// 1 if a_i leaves the current rowspan and min{[a_i^T Q^- a_i]^{p/2}, 1}
/// otherwise, after which Q gains w^{1-2/p} a_i a_i^T. Steps must be applied
/// in stream order (single-writer).
///
/// Also tracks a cheap upper bound on ||A_i||_2 (Frobenius accumulation) and a
/// lower floor on the smallest nonzero singular value over prefixes, refreshed
/// every d rows, for an online condition-number estimate.
class OnlineLewisState {
public:
  OnlineLewisState(Index dim, double p);

  /// Processes one row and returns its online Lewis weight.
  /// Non-finite rows throw InvalidInputError and leave the state unchanged.
  /// Zero rows get weight 0 and do not touch the quadratic.
  double step(const Vector& a);

  /// Weight the row would receive, without the uncapped min{.,1}:
  /// [quad form]^{p/2}, +inf when rank-increasing. Does not mutate.
  double peek_uncapped(const Vector& a) const;

  double p() const { return p_; }
  Index dim() const { return quadratic_.dim(); }
  Index rows_seen() const { return rows_seen_; }
  Index rank() const { return quadratic_.rank(); }
  double weight_sum() const { return weight_sum_; }
  const PsdQuadratic& quadratic() const { return quadratic_; }

  /// Running estimate of log(kappa^OL) ingredients: sigma_max upper bound and
  /// the smallest-nonzero-singular-value floor over prefixes seen so far.
  double sigma_max_bound() const { return std::sqrt(sq_frobenius_); }
  double sigma_min_floor() const;
  double kappa_online_estimate() const;

  /// Snapshot for crash recovery: header {p, rows_seen, rank, weight_sum}
  /// followed by the d x d quadratic, all little-endian 64-bit values.
  void save_snapshot(std::ostream& out) const;
  static OnlineLewisState load_snapshot(std::istream& in);

private:
  void refresh_sigma_floor() const;

  double p_;
  PsdQuadratic quadratic_;
  PsdQuadratic gram_;  // unweighted A^T A, for the condition-number trackers
  Index rows_seen_ = 0;
  double weight_sum_ = 0.0;
  double sq_frobenius_ = 0.0;
  mutable double sigma_min_floor_ = std::numeric_limits<double>::infinity();
  mutable Index rows_at_refresh_ = 0;
};

/// Online leverage scores: the p = 2 specialization.
class OnlineLeverageState : public OnlineLewisState {
public:
  explicit OnlineLeverageState(Index dim) : OnlineLewisState(dim, 2.0) {}
};

/// k = ceil(1/beta) copies of a / k^{1/p}; lp-isometric row splitting.
std::vector<Vector> flatten_row(const Vector& a, double beta, double p);

/// Stream adapter that splits every non-rank-increasing row into enough
/// copies that its online Lewis weight lands at or below beta. The per-row
/// copy count adapts to the row's current uncapped estimate, mirroring the
/// proof of the flattening bound: k = ceil(estimate / beta). Rank-increasing
/// rows pass through unsplit (their weight is 1 by definition).
class FlattenAdapter {
public:
  FlattenAdapter(Index dim, double p, double beta);

  /// Rows to feed downstream in place of a (1 copy when no split happens).
  std::vector<Vector> process(const Vector& a);

  const OnlineLewisState& reference_state() const { return state_; }
  double beta() const { return beta_; }

private:
  OnlineLewisState state_;
  double beta_;
};

struct EstimateStep {
  double estimate = 0.0;     // w~_i
  double probability = 0.0;  // p_i
  bool kept = false;
};

/// Sampling-based online Lewis weight estimation for p in (0,2): keeps row
/// a_i / sqrt(p_i) with probability p_i = min{w~_i / alpha, 1} and uses the
/// stored subsample's quadratic for subsequent estimates. Rows outside the
/// stored rowspan get estimate 1 and are force-kept so the rowspan never
/// degrades. Feed a pre-flattened stream (FlattenAdapter) so non-rank
/// increasing weights stay below the beta required by the guarantee.
class SampledEstimatorState {
public:
  SampledEstimatorState(Index dim, double p, double alpha, CounterRng rng);

  EstimateStep step(const Vector& a);

  double p() const { return p_; }
  double alpha() const { return alpha_; }
  Index rows_seen() const { return rows_seen_; }
  Index stored_rows() const { return static_cast<Index>(stored_.size()); }
  double estimate_sum() const { return estimate_sum_; }
  const PsdQuadratic& quadratic() const { return quadratic_; }
  const std::vector<Vector>& stored() const { return stored_; }

private:
  double p_;
  double alpha_;
  PsdQuadratic quadratic_;
  std::vector<Vector> stored_;
  CounterRng rng_;
  Index rows_seen_ = 0;
  double estimate_sum_ = 0.0;
};

/// ||w||_1^{max(0, p/2-1)} w_i: per-row online lp sensitivity bounds implied
/// by one-sided weights.
Vector online_sensitivity_bound(const WeightVector& w);

/// Exact online condition number ||A||_2 max_i ||A_i^-||_2 via per-prefix
/// spectral decompositions of the running Gram matrix. Offline diagnostic.
double kappa_online(const Matrix& a);

/// Online Lewis weights of every row of a matrix played as a stream.
WeightVector online_lewis_weights(const Matrix& a, double p);

}  // namespace lpcoreset
