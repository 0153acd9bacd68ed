#include "lpcoreset/glm.hpp"

#include "lpcoreset/online_lewis.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace lpcoreset {

namespace {

double stable_logistic(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Adaptive Simpson fallback for the p-generalized normal mass on [lo, hi].
double density_integral(double p, double lo, double hi, double tol) {
  const auto f = [p](double t) { return std::exp(-std::pow(std::abs(t), p) / p); };
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fb, double fm, double whole,
          int depth) -> double {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
      return left + right + (left + right - whole) / 15.0;
    }
    return rec(a, m, fa, fm, flm, left, depth - 1) +
           rec(m, b, fm, fb, frm, right, depth - 1);
  };
  const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(lo, hi, fa, fb, fm, whole, 48);
}

double regularized_gamma_p(double a, double z, double tol) {
  try {
    return boost::math::gamma_p(a, z);
  } catch (const std::exception&) {
    // Quadrature over the density on [0, z^{1/?}] via the inverse substitution.
    const double p = 1.0 / a;
    const double r = std::pow(p * z, 1.0 / p);
    const double half_mass = std::pow(p, 1.0 / p - 1.0) * std::tgamma(a);
    return density_integral(p, 0.0, r, tol) / half_mass;
  }
}

double regularized_gamma_q(double a, double z, double tol) {
  try {
    return boost::math::gamma_q(a, z);
  } catch (const std::exception&) {
    return 1.0 - regularized_gamma_p(a, z, tol);
  }
}

// log Gamma(a, z) for large z via the divergent asymptotic series (four
// terms; relative error ~ (a-1)^4 / z^4, used only for z > 600).
double log_upper_gamma_asymptotic(double a, double z) {
  const double t1 = (a - 1.0) / z;
  const double t2 = t1 * (a - 2.0) / z;
  const double t3 = t2 * (a - 3.0) / z;
  return (a - 1.0) * std::log(z) - z + std::log1p(t1 + t2 + t3);
}

}  // namespace

HingeSpec HingeSpec::relu() {
  HingeSpec spec;
  spec.kind = HingeKind::Relu;
  spec.lipschitz = 1.0;
  spec.a1 = 0.0;
  spec.a2 = 0.0;
  spec.phi = [](double x) { return std::max(0.0, x); };
  return spec;
}

HingeSpec HingeSpec::hinge() {
  HingeSpec spec;
  spec.kind = HingeKind::Hinge;
  spec.lipschitz = 1.0;
  spec.a1 = 1.0;
  spec.a2 = 1.0;
  spec.phi = [](double x) { return std::max(0.0, 1.0 + x); };
  return spec;
}

HingeSpec HingeSpec::logistic() {
  HingeSpec spec;
  spec.kind = HingeKind::Logistic;
  spec.lipschitz = 1.0;
  spec.a1 = std::log(2.0);
  spec.a2 = std::log(2.0);
  spec.phi = stable_logistic;
  return spec;
}

HingeSpec HingeSpec::custom(std::function<double(double)> fn, double lipschitz,
                            double a1, double a2) {
  if (!(lipschitz > 0.0) || a1 < 0.0 || a2 < 0.0) {
    throw ConfigError("HingeSpec: need L > 0, a1 >= 0, a2 >= 0");
  }
  HingeSpec spec;
  spec.kind = HingeKind::Custom;
  spec.lipschitz = lipschitz;
  spec.a1 = a1;
  spec.a2 = a2;
  spec.phi = std::move(fn);
  return spec;
}

void ProbitSpec::validate() const {
  if (!(p >= 1.0)) throw ConfigError("ProbitSpec: p must be >= 1");
  if (!(quadrature_tol > 0.0)) throw ConfigError("ProbitSpec: bad tolerance");
}

double phi_p(double r, const ProbitSpec& spec) {
  spec.validate();
  if (!std::isfinite(r)) throw InvalidInputError("phi_p: non-finite argument");
  if (r == 0.0) return 0.5;
  const double a = 1.0 / spec.p;
  const double z = std::pow(std::abs(r), spec.p) / spec.p;
  if (r > 0.0) {
    return 0.5 * (1.0 + regularized_gamma_p(a, z, spec.quadrature_tol));
  }
  return 0.5 * regularized_gamma_q(a, z, spec.quadrature_tol);
}

double psi_p(double x, const ProbitSpec& spec) {
  spec.validate();
  if (!std::isfinite(x)) throw InvalidInputError("psi_p: non-finite argument");
  if (x == 0.0) return std::log(2.0);
  const double a = 1.0 / spec.p;
  const double z = std::pow(std::abs(x), spec.p) / spec.p;
  if (x < 0.0) {
    // Phi_p(-x) = 1 - Q(a,z)/2 is close to 1; keep the small complement.
    const double q = regularized_gamma_q(a, z, spec.quadrature_tol);
    return -std::log1p(-0.5 * q);
  }
  if (z <= 600.0) {
    const double q = regularized_gamma_q(a, z, spec.quadrature_tol);
    return std::log(2.0) - std::log(q);
  }
  // Tail where Q underflows: psi = log 2 + lgamma(a) - log Gamma(a, z).
  return std::log(2.0) + std::lgamma(a) - log_upper_gamma_asymptotic(a, z);
}

double mu_p_estimate(const Matrix& a, double p, int trials, uint64_t seed) {
  if (a.rows() == 0 || a.norm() == 0.0) {
    throw InvalidInputError("mu_p_estimate: matrix must be nonzero");
  }
  const Index d = a.cols();
  CounterRng rng(seed, "mu-estimate");

  const auto ratio = [&](const Vector& x) -> double {
    const Vector v = a * x;
    double pos = 0.0, neg = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
      if (v(i) > 0.0) pos += std::pow(v(i), p);
      else if (v(i) < 0.0) neg += std::pow(-v(i), p);
    }
    double best = 1.0;
    if (pos > 0.0) {
      best = neg == 0.0 ? std::numeric_limits<double>::infinity()
                        : std::max(best, pos / neg);
    }
    if (neg > 0.0 && !std::isinf(best)) {
      best = pos == 0.0 ? std::numeric_limits<double>::infinity()
                        : std::max(best, neg / pos);
    }
    if (pos == 0.0 && neg == 0.0) return 0.0;  // x orthogonal to every row
    return best;
  };

  std::vector<Vector> candidates;
  for (Index j = 0; j < d; ++j) candidates.push_back(Vector::Unit(d, j));
  const Index row_stride = std::max<Index>(1, a.rows() / 64);
  for (Index i = 0; i < a.rows(); i += row_stride) {
    if (a.row(i).norm() > 0.0) candidates.push_back(a.row(i).normalized().transpose());
  }
  for (int t = 0; t < trials; ++t) {
    Vector x(d);
    for (Index j = 0; j < d; ++j) x(j) = rng.next_gaussian();
    candidates.push_back(std::move(x));
  }

  double best = 0.0;
  std::vector<std::pair<double, Index>> scored;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const double r = ratio(candidates[i]);
    if (std::isinf(r)) return r;
    best = std::max(best, r);
    scored.emplace_back(r, static_cast<Index>(i));
  }
  std::sort(scored.rbegin(), scored.rend());

  const size_t refine = std::min<size_t>(16, scored.size());
  for (size_t t = 0; t < refine; ++t) {
    Vector x = candidates[static_cast<size_t>(scored[t].second)];
    double value = scored[t].first;
    double step = 0.25;
    for (int iter = 0; iter < 50; ++iter) {
      bool improved = false;
      for (Index coord = 0; coord < d; ++coord) {
        for (double sign : {1.0, -1.0}) {
          Vector cand = x;
          cand(coord) += sign * step * std::max(1.0, x.norm());
          const double r = ratio(cand);
          if (std::isinf(r)) return r;
          if (r > value) {
            value = r;
            x = cand;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
      if (step < 1e-6) break;
    }
    best = std::max(best, value);
  }
  return best;
}

void GlmConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("GlmConfig: epsilon must be in (0,1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("GlmConfig: delta must be in (0,1)");
  }
  if (!(mu > 0.0)) throw ConfigError("GlmConfig: mu must be positive");
  if (!(c_sens > 0.0)) throw ConfigError("GlmConfig: c_sens must be positive");
  if (reservoir_size < 0) throw ConfigError("GlmConfig: bad reservoir size");
}

GlmCoreset hinge_coreset(const Matrix& rows, const HingeSpec& spec, double mu,
                         const GlmConfig& config) {
  GlmConfig cfg = config;
  cfg.mu = mu;
  cfg.validate();
  if (spec.kind != HingeKind::Relu && !(spec.a2 > 0.0)) {
    throw ConfigError("hinge_coreset: need a2 > 0 or the ReLU loss");
  }

  OnlineLewisState state(rows.cols(), 1.0);
  CounterRng rng(cfg.seed, "glm-sample");
  const double factor = cfg.c_sens * (mu / cfg.epsilon) * (mu / cfg.epsilon);

  GlmCoreset coreset;
  coreset.dim = rows.cols();
  coreset.source_rows = rows.rows();
  coreset.seed = cfg.seed;
  for (Index i = 0; i < rows.rows(); ++i) {
    const double w = state.step(rows.row(i).transpose());
    // 1/i with the running count: at least the 1/n the guarantee asks for.
    const double score = std::max(w, 1.0 / static_cast<double>(i + 1));
    const double q = std::min(factor * score, 1.0);
    coreset.score_sum += score;
    if (rng.next_coin(q)) {
      coreset.entries.push_back(
          GlmCoresetEntry{i, rows.row(i).transpose(), 1.0 / q, score});
    }
  }
  return coreset;
}

GlmCoreset probit_coreset(const Matrix& rows, const ProbitSpec& spec,
                          double mu_p, const GlmConfig& config) {
  spec.validate();
  GlmConfig cfg = config;
  cfg.mu = mu_p;
  cfg.validate();

  const Index n = rows.rows();
  const Index d = rows.cols();
  Index m = cfg.reservoir_size;
  if (m == 0) {
    // Size heuristic from the sensitivity bound: S = C mu (d log n)^{1 v p/2}.
    const double s = cfg.c_sens * mu_p *
                     std::pow(static_cast<double>(d) *
                                  std::log(static_cast<double>(n) + 1.0),
                              std::max(1.0, spec.p / 2.0));
    m = static_cast<Index>(std::ceil(s / (cfg.epsilon * cfg.epsilon)));
  }
  m = std::min(m, n);
  if (m < 1) throw ConfigError("probit_coreset: reservoir size must be >= 1");

  OnlineLewisState state(d, spec.p);
  CounterRng rng(cfg.seed, "glm-reservoir");

  struct Item {
    double key;
    GlmCoresetEntry entry;
    bool operator>(const Item& other) const { return key > other.key; }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> reservoir;

  double score_sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double w = state.step(rows.row(i).transpose());
    const double s_hat =
        spec.p > 2.0 ? std::pow(state.weight_sum(), spec.p / 2.0 - 1.0) * w : w;
    const double sigma =
        cfg.c_sens * mu_p * (1.0 / static_cast<double>(i + 1) + s_hat);
    score_sum += sigma;
    if (sigma <= 0.0) continue;
    // Exponential-jump keys: keep the m largest log(u)/sigma.
    const double u = std::max(rng.next_double(), 1e-300);
    const double key = std::log(u) / sigma;
    if (static_cast<Index>(reservoir.size()) < m) {
      reservoir.push(Item{key, GlmCoresetEntry{i, rows.row(i).transpose(), 0.0, sigma}});
    } else if (key > reservoir.top().key) {
      reservoir.pop();
      reservoir.push(Item{key, GlmCoresetEntry{i, rows.row(i).transpose(), 0.0, sigma}});
    }
  }

  GlmCoreset coreset;
  coreset.dim = d;
  coreset.source_rows = n;
  coreset.seed = cfg.seed;
  coreset.score_sum = score_sum;
  while (!reservoir.empty()) {
    GlmCoresetEntry entry = reservoir.top().entry;
    reservoir.pop();
    entry.weight = score_sum / (static_cast<double>(m) * entry.score);
    coreset.entries.push_back(std::move(entry));
  }
  std::sort(coreset.entries.begin(), coreset.entries.end(),
            [](const GlmCoresetEntry& lhs, const GlmCoresetEntry& rhs) {
              return lhs.index < rhs.index;
            });
  return coreset;
}

double hinge_cost(const Matrix& rows, const Vector& weights, const Vector& x,
                  const HingeSpec& spec) {
  const Vector v = rows * x;
  double total = 0.0;
  for (Index i = 0; i < v.size(); ++i) total += weights(i) * spec(v(i));
  return total;
}

double hinge_cost(const GlmCoreset& coreset, const Vector& x,
                  const HingeSpec& spec) {
  double total = 0.0;
  for (const auto& e : coreset.entries) total += e.weight * spec(e.row.dot(x));
  return total;
}

double probit_cost(const Matrix& rows, const Vector& weights, const Vector& x,
                   const ProbitSpec& spec) {
  const Vector v = rows * x;
  double total = 0.0;
  for (Index i = 0; i < v.size(); ++i) total += weights(i) * psi_p(v(i), spec);
  return total;
}

double probit_cost(const GlmCoreset& coreset, const Vector& x,
                   const ProbitSpec& spec) {
  double total = 0.0;
  for (const auto& e : coreset.entries) {
    total += e.weight * psi_p(e.row.dot(x), spec);
  }
  return total;
}

Matrix fold_labels(const Matrix& features, const Vector& labels) {
  if (features.rows() != labels.size()) {
    throw InvalidInputError("fold_labels: label count mismatch");
  }
  Matrix folded(features.rows(), features.cols());
  for (Index i = 0; i < features.rows(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw InvalidInputError("fold_labels: labels must be +1 or -1");
    }
    folded.row(i) = -labels(i) * features.row(i);
  }
  return folded;
}

}  // namespace lpcoreset
