#pragma once

#include <functional>
#include <vector>

#include "lpcoreset/common.hpp"
#include "lpcoreset/rng.hpp"

namespace lpcoreset {

enum class HingeKind { Relu, Hinge, Logistic, Custom };

/// An (L, a1, a2)-nice hinge loss: L-Lipschitz, within a1 of ReLU everywhere,
/// and at least a2 on [0, inf).
struct HingeSpec {
  HingeKind kind = HingeKind::Logistic;
  double lipschitz = 1.0;
  double a1 = 0.0;
  double a2 = 0.0;
  std::function<double(double)> phi;

  double operator()(double x) const { return phi(x); }

  static HingeSpec relu();
  static HingeSpec hinge();
  static HingeSpec logistic();
  static HingeSpec custom(std::function<double(double)> fn, double lipschitz,
                          double a1, double a2);
};

struct ProbitSpec {
  double p = 2.0;
  double quadrature_tol = 1e-12;

  void validate() const;  // p >= 1
};

/// CDF of the p-generalized normal distribution,
///   Phi_p(r) = p^{1-1/p} / (2 Gamma(1/p)) * int_{-inf}^r exp(-|t|^p / p) dt,
/// evaluated through the regularized incomplete gamma function.
double phi_p(double r, const ProbitSpec& spec);

/// p-probit loss psi_p(x) = -log(Phi_p(-x)), asymptotics-stable in both tails.
double psi_p(double x, const ProbitSpec& spec);

/// Lower-bound estimate of the mu_p complexity
///   sup_x  sum_{<a_i,x> > 0} |<a_i,x>|^p / sum_{<a_i,x> < 0} |<a_i,x>|^p
/// over random directions, row directions, coordinate axes and a local
/// search; +inf when a denominator vanishes against a nonzero numerator.
double mu_p_estimate(const Matrix& a, double p, int trials = 2000,
                     uint64_t seed = 1);

struct GlmConfig {
  double epsilon = 0.3;
  double delta = 0.1;
  double mu = 1.0;          // user-declared upper bound on mu_p(A)
  double c_sens = 1.0;      // hidden sensitivity constant, exposed
  Index reservoir_size = 0; // probit coreset size; 0 derives it from mu and d
  uint64_t seed = 0;

  void validate() const;
};

/// GLM coresets carry inverse-probability weights (not lp scales).
struct GlmCoresetEntry {
  Index index = 0;
  Vector row;
  double weight = 1.0;
  double score = 0.0;  // sampling score the row was drawn under
};

struct GlmCoreset {
  std::vector<GlmCoresetEntry> entries;
  Index dim = 0;
  Index source_rows = 0;
  uint64_t seed = 0;
  double score_sum = 0.0;

  Index size() const { return static_cast<Index>(entries.size()); }
};

/// One-shot Bernoulli coreset for a nice hinge loss over rows a_i (already
/// label-folded): p_i = min{ C (mu/eps)^2 max{w~_i, 1/i}, 1 } with w~ the
/// deterministic online l1 Lewis weights; kept rows get weight 1/p_i.
/// Requires spec.a2 > 0 or the ReLU kind, and mu > 0.
GlmCoreset hinge_coreset(const Matrix& rows, const HingeSpec& spec, double mu,
                         const GlmConfig& config);

/// One-pass p-probit coreset by weighted reservoir sampling on sensitivity
/// scores sigma_i = C mu_p (1/i + s^_i), where s^_i is the deterministic
/// online lp Lewis weight for p < 2 and ||w~||_1^{p/2-1} w~_i for p > 2.
/// Kept rows get the standard weight sum(sigma) / (m sigma_i).
GlmCoreset probit_coreset(const Matrix& rows, const ProbitSpec& spec,
                          double mu_p, const GlmConfig& config);

/// sum_i u_i * phi(<a_i, x>) over a coreset (or the full data with u = 1).
double hinge_cost(const Matrix& rows, const Vector& weights, const Vector& x,
                  const HingeSpec& spec);
double hinge_cost(const GlmCoreset& coreset, const Vector& x,
                  const HingeSpec& spec);
double probit_cost(const Matrix& rows, const Vector& weights, const Vector& x,
                   const ProbitSpec& spec);
double probit_cost(const GlmCoreset& coreset, const Vector& x,
                   const ProbitSpec& spec);

/// Fold labels into rows: a_i = -y_i z_i for y in {-1, +1}.
Matrix fold_labels(const Matrix& features, const Vector& labels);

}  // namespace lpcoreset
