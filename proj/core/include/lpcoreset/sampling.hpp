#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lpcoreset/common.hpp"
#include "lpcoreset/online_lewis.hpp"
#include "lpcoreset/rng.hpp"
#include "lpcoreset/weight_vector.hpp"

namespace lpcoreset {

/// p-range the sampling formulas distinguish.
enum class SamplingRegime { BelowOne, One, OneToTwo, Two, AboveTwo };

struct SamplingConfig {
  double p = 2.0;
  double epsilon = 0.25;
  double delta = 0.1;
  double c = 1.0;       // absolute constant folded out of the formulas
  double gamma = 1.0;   // one-sidedness factor of the supplied weights
  uint64_t seed = 0;

  SamplingRegime regime() const;
  void validate() const;  // throws ConfigError
};

/// Keep probability for a single row: min{ C * prefactor(p, gamma) * w_i /
/// (d * beta(regime)), 1 }, where beta carries the eps^2 / polylog budget and,
/// for p > 2, the T^{p/2} weight-sum factor. Natural logs; log d clamps to 1
/// at d = 1. Monotone nondecreasing in w_i and in C.
double sample_probability(double w_i, Index d, double n, double t_sum,
                          const SamplingConfig& config);

/// Probabilities for a whole weight vector certifying a stream of n rows in
/// dimension d. Requires t_sum >= sum(w).
Vector sample_probabilities(const WeightVector& w, const SamplingConfig& config,
                            double n, double t_sum, Index d);

struct CoresetEntry {
  Index index = 0;      // position in the source stream
  Vector row;           // unscaled row as it arrived
  double scale = 1.0;   // 1 / probability^{1/p}
  double probability = 1.0;
};

/// Sampled rows with scale factors: || diag(s) A x ||_p approximates
/// || A x ||_p over the source rows.
struct Coreset {
  std::vector<CoresetEntry> entries;
  double p = 2.0;
  Index dim = 0;
  Index source_rows = 0;
  uint64_t seed = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  // Stream diagnostics carried into the metadata file.
  double weight_sum = 0.0;
  double kappa_estimate = 1.0;

  Index size() const { return static_cast<Index>(entries.size()); }
  Matrix scaled_matrix() const;  // rows scale_i * row_i
};

/// One-shot Bernoulli sampling of rows with the given keep probabilities;
/// kept row i gets scale probabilities(i)^{-1/p}.
Coreset bernoulli_sample(const Matrix& rows, const Vector& probabilities,
                         double p, uint64_t seed);

struct OnlineCoresetOptions {
  SamplingConfig config;
  /// Back the weight overestimates by the sampling-based estimator instead of
  /// the exact online quadratic (p < 2 only). The stream is then flattened
  /// with flatten_beta and coreset indices refer to the flattened stream.
  bool use_estimator = false;
  double estimator_alpha = 0.02;
  double flatten_beta = 0.02;
};

/// Streaming one-shot coreset driver: per row, takes the online Lewis weight
/// overestimate, freezes the running weight sum and row count into the
/// probability formula, and keeps or drops with fresh randomness (one coin
/// per processed row, so any prefix replays to the same coreset).
class OnlineCoresetBuilder {
public:
  OnlineCoresetBuilder(Index dim, const OnlineCoresetOptions& options);

  /// Processes one source row; returns the number of kept entries added.
  int push(const Vector& row);

  /// Coreset over everything pushed so far.
  Coreset take() const;

  Index rows_pushed() const { return rows_pushed_; }
  Index kept() const { return static_cast<Index>(entries_.size()); }
  double weight_sum() const;

private:
  int sample_one(const Vector& row, double estimate, double t_sum);

  OnlineCoresetOptions options_;
  Index dim_;
  std::optional<OnlineLewisState> exact_state_;
  std::optional<FlattenAdapter> flatten_;
  std::optional<SampledEstimatorState> estimator_;
  CounterRng sample_rng_;
  std::vector<CoresetEntry> entries_;
  Index rows_pushed_ = 0;   // source rows
  Index stream_index_ = 0;  // index in the (possibly flattened) stream
};

/// Convenience wrapper: play the rows of a matrix through the online driver.
Coreset online_coreset(const Matrix& rows, const OnlineCoresetOptions& options);

struct DistortionReport {
  double distortion = 0.0;  // max |ratio of p-th powers - 1| observed
  bool exact = false;       // true for the p = 2 eigenvalue route
  bool rank_deficient = false;
};

/// Verifies || S A x ||_p^p against || A x ||_p^p. For p = 2 this is exact:
/// the extreme eigenvalues of the whitened Gram pencil. For p != 2 it is a
/// lower bound on the sup: `trials` random directions refined by coordinate
/// ascent (50 steps on the 32 worst). A coreset spanning less than A's
/// rowspan reports infinite distortion.
DistortionReport distortion_oracle(const Matrix& a, const Coreset& coreset,
                                   double p, int trials = 10000,
                                   uint64_t seed = 0x9E3779B9u);

/// Exact p = 2 distortion between two PSD Grams restricted to ref's span:
/// max |lambda - 1| over the whitened pencil, +inf if test loses rank.
double pencil_distortion(const Matrix& gram_ref, const Matrix& gram_test);

}  // namespace lpcoreset
