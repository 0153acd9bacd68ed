#include "lpcoreset/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace lpcoreset {

namespace {

double log_clamped_dim(Index d) {
  return d <= 1 ? 1.0 : std::log(static_cast<double>(d));
}

}  // namespace

SamplingRegime SamplingConfig::regime() const {
  if (p < 1.0) return SamplingRegime::BelowOne;
  if (p == 1.0) return SamplingRegime::One;
  if (p < 2.0) return SamplingRegime::OneToTwo;
  if (p == 2.0) return SamplingRegime::Two;
  return SamplingRegime::AboveTwo;
}

void SamplingConfig::validate() const {
  if (!(p > 0.0)) throw ConfigError("SamplingConfig: p must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("SamplingConfig: epsilon must be in (0,1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("SamplingConfig: delta must be in (0,1)");
  }
  if (!(c > 0.0)) throw ConfigError("SamplingConfig: C must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("SamplingConfig: gamma must be in (0,1]");
  }
}

double sample_probability(double w_i, Index d, double n, double t_sum,
                          const SamplingConfig& config) {
  if (w_i <= 0.0) return 0.0;
  const double eps2 = config.epsilon * config.epsilon;
  const double ld = log_clamped_dim(d);
  const double ln_n = std::log(std::max(n, 1.0));
  const double ln_inv_delta = std::log(1.0 / config.delta);
  const double dd = static_cast<double>(d);

  double beta;
  double prefactor = 1.0;
  switch (config.regime()) {
    case SamplingRegime::BelowOne:
      beta = eps2 / (dd * (ld * ld * ld + ln_inv_delta));
      break;
    case SamplingRegime::One:
      beta = eps2 / (dd * std::log(std::max(n, 1.0) / config.delta));
      break;
    case SamplingRegime::OneToTwo:
      beta = eps2 / (dd * (ld * ld * ln_n + ln_inv_delta));
      break;
    case SamplingRegime::Two:
      // Matrix-Chernoff budget; the paper's p = 2 case defers to prior work.
      beta = eps2 / (dd * std::log(dd / config.delta + 1.0));
      break;
    case SamplingRegime::AboveTwo: {
      const double t = std::max(t_sum, 1.0);
      beta = eps2 /
             (std::pow(t, config.p / 2.0) *
              (ld * ld * ln_n / config.gamma + ln_inv_delta));
      prefactor = std::pow(
          std::pow(config.p / 2.0, 1.0 / (1.0 - 2.0 / config.p)) / config.gamma,
          config.p / 2.0);
      break;
    }
  }
  const double q = config.c * prefactor * w_i / (dd * beta);
  return std::min(q, 1.0);
}

Vector sample_probabilities(const WeightVector& w, const SamplingConfig& config,
                            double n, double t_sum, Index d) {
  config.validate();
  if (t_sum < w.sum() - 1e-9 * std::max(1.0, w.sum())) {
    throw ConfigError("sample_probabilities: T must be at least sum(w)");
  }
  Vector probs(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    probs(i) = sample_probability(w.weights(i), d, n, t_sum, config);
  }
  return probs;
}

Matrix Coreset::scaled_matrix() const {
  Matrix m(static_cast<Index>(entries.size()), dim);
  for (Index i = 0; i < m.rows(); ++i) {
    m.row(i) = entries[static_cast<size_t>(i)].scale *
               entries[static_cast<size_t>(i)].row.transpose();
  }
  return m;
}

Coreset bernoulli_sample(const Matrix& rows, const Vector& probabilities,
                         double p, uint64_t seed) {
  if (rows.rows() != probabilities.size()) {
    throw InvalidInputError("bernoulli_sample: probability length mismatch");
  }
  for (Index i = 0; i < probabilities.size(); ++i) {
    const double q = probabilities(i);
    if (!(q >= 0.0 && q <= 1.0)) {
      throw InvalidInputError("bernoulli_sample: probabilities must be in [0,1]");
    }
  }
  CounterRng rng(seed, "sample");
  Coreset coreset;
  coreset.p = p;
  coreset.dim = rows.cols();
  coreset.source_rows = rows.rows();
  coreset.seed = seed;
  for (Index i = 0; i < rows.rows(); ++i) {
    const double q = probabilities(i);
    if (rng.next_coin(q)) {
      coreset.entries.push_back(CoresetEntry{
          i, rows.row(i).transpose(), std::pow(q, -1.0 / p), q});
    }
  }
  return coreset;
}

OnlineCoresetBuilder::OnlineCoresetBuilder(Index dim,
                                           const OnlineCoresetOptions& options)
    : options_(options),
      dim_(dim),
      sample_rng_(options.config.seed, "coreset-sample") {
  options_.config.validate();
  if (options_.use_estimator) {
    if (!(options_.config.p < 2.0)) {
      throw ConfigError("OnlineCoresetBuilder: estimator path requires p < 2");
    }
    flatten_.emplace(dim, options_.config.p, options_.flatten_beta);
    estimator_.emplace(dim, options_.config.p, options_.estimator_alpha,
                       CounterRng(options_.config.seed, "lewis-estimate"));
  } else {
    exact_state_.emplace(dim, options_.config.p);
  }
}

double OnlineCoresetBuilder::weight_sum() const {
  return options_.use_estimator ? estimator_->estimate_sum()
                                : exact_state_->weight_sum();
}

int OnlineCoresetBuilder::sample_one(const Vector& row, double estimate,
                                     double t_sum) {
  const Index index = stream_index_++;
  const double q = sample_probability(
      estimate, dim_, static_cast<double>(stream_index_), t_sum,
      options_.config);
  // Exactly one coin per stream row keeps prefixes replayable.
  const bool keep = sample_rng_.next_coin(q);
  if (!keep) return 0;
  entries_.push_back(
      CoresetEntry{index, row, std::pow(q, -1.0 / options_.config.p), q});
  return 1;
}

int OnlineCoresetBuilder::push(const Vector& row) {
  if (row.size() != dim_) {
    throw InvalidInputError("OnlineCoresetBuilder: dimension mismatch");
  }
  rows_pushed_ += 1;
  int added = 0;
  if (options_.use_estimator) {
    for (const Vector& piece : flatten_->process(row)) {
      const EstimateStep est = estimator_->step(piece);
      added += sample_one(piece, est.estimate, estimator_->estimate_sum());
    }
  } else {
    const double w = exact_state_->step(row);
    added += sample_one(row, w, exact_state_->weight_sum());
  }
  return added;
}

Coreset OnlineCoresetBuilder::take() const {
  Coreset coreset;
  coreset.entries = entries_;
  coreset.p = options_.config.p;
  coreset.dim = dim_;
  coreset.source_rows = stream_index_;
  coreset.seed = options_.config.seed;
  coreset.epsilon = options_.config.epsilon;
  coreset.delta = options_.config.delta;
  coreset.weight_sum = weight_sum();
  coreset.kappa_estimate = options_.use_estimator
                               ? flatten_->reference_state().kappa_online_estimate()
                               : exact_state_->kappa_online_estimate();
  return coreset;
}

Coreset online_coreset(const Matrix& rows, const OnlineCoresetOptions& options) {
  OnlineCoresetBuilder builder(rows.cols(), options);
  for (Index i = 0; i < rows.rows(); ++i) {
    builder.push(rows.row(i).transpose());
  }
  return builder.take();
}

double pencil_distortion(const Matrix& gram_ref, const Matrix& gram_test) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_ref);
  const Vector& vals = eig.eigenvalues();
  const Index d = gram_ref.rows();
  const double lam_max = std::max(0.0, vals(d - 1));
  const double cutoff =
      static_cast<double>(d) * std::numeric_limits<double>::epsilon() * lam_max;
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) keep.push_back(i);
  }
  if (keep.empty()) return 0.0;
  Matrix whiten(d, static_cast<Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    whiten.col(static_cast<Index>(j)) =
        eig.eigenvectors().col(keep[j]) / std::sqrt(vals(keep[j]));
  }
  const Matrix pencil = whiten.transpose() * gram_test * whiten;
  Eigen::SelfAdjointEigenSolver<Matrix> peig(pencil);
  const Vector& mu = peig.eigenvalues();
  if (mu(0) < 1e-12) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(mu(0) - 1.0), std::abs(mu(mu.size() - 1) - 1.0));
}

namespace {

// |sum |Bx|^p / sum |Ax|^p - 1| for one direction.
double power_ratio_error(const Matrix& a, const Matrix& b, double p,
                         const Vector& x) {
  const double den = (a * x).array().abs().pow(p).sum();
  const double num = (b * x).array().abs().pow(p).sum();
  if (den == 0.0) {
    return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(num / den - 1.0);
}

}  // namespace

DistortionReport distortion_oracle(const Matrix& a, const Coreset& coreset,
                                   double p, int trials, uint64_t seed) {
  DistortionReport report;
  const Matrix scaled = coreset.scaled_matrix();
  const Matrix gram_ref = a.transpose() * a;
  const Matrix gram_test = scaled.transpose() * scaled;

  const double spectral = pencil_distortion(gram_ref, gram_test);
  if (std::isinf(spectral)) {
    report.rank_deficient = true;
    report.distortion = std::numeric_limits<double>::infinity();
    report.exact = (p == 2.0);
    return report;
  }
  if (p == 2.0) {
    report.exact = true;
    report.distortion = spectral;
    return report;
  }

  // Random directions inside rowspan(A), evaluated in fixed-size blocks; the
  // final value is a max, so the block-parallel reduction is exact.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_ref);
  const Vector& vals = eig.eigenvalues();
  const Index d = a.cols();
  const double cutoff = static_cast<double>(d) *
                        std::numeric_limits<double>::epsilon() *
                        std::max(0.0, vals(d - 1));
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0) keep.push_back(i);
  }
  const Index r = static_cast<Index>(keep.size());
  if (r == 0) return report;
  Matrix basis(d, r);
  for (Index j = 0; j < r; ++j) basis.col(j) = eig.eigenvectors().col(keep[j]);

  CounterRng rng(seed, "verify");
  Matrix directions(r, trials);
  for (Index j = 0; j < trials; ++j) {
    for (Index i = 0; i < r; ++i) directions(i, j) = rng.next_gaussian();
  }

  const Matrix a_basis = a * basis;
  const Matrix b_basis = scaled * basis;
  Vector errors(trials);

  const int threads = worker_threads();
  const Index block = 512;
  auto run_blocks = [&](Index begin, Index end) {
    for (Index start = begin; start < end; start += block) {
      const Index cols = std::min(block, end - start);
      const Matrix av = a_basis * directions.middleCols(start, cols);
      const Matrix bv = b_basis * directions.middleCols(start, cols);
      for (Index j = 0; j < cols; ++j) {
        const double den = av.col(j).array().abs().pow(p).sum();
        const double num = bv.col(j).array().abs().pow(p).sum();
        errors(start + j) =
            den == 0.0 ? 0.0 : std::abs(num / den - 1.0);
      }
    }
  };
  if (threads <= 1 || trials < 2 * block) {
    run_blocks(0, trials);
  } else {
    std::vector<std::thread> pool;
    const Index chunk = (trials + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const Index begin = std::min<Index>(t * chunk, trials);
      const Index end = std::min<Index>(begin + chunk, trials);
      if (begin < end) pool.emplace_back(run_blocks, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Refine the 32 worst directions by coordinate ascent.
  std::vector<Index> order(trials);
  for (Index i = 0; i < trials; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index lhs, Index rhs) { return errors(lhs) > errors(rhs); });
  const Index refine = std::min<Index>(32, trials);

  double best = errors.size() > 0 ? errors.maxCoeff() : 0.0;
  for (Index t = 0; t < refine; ++t) {
    Vector y = directions.col(order[static_cast<size_t>(t)]);
    double value = power_ratio_error(a_basis, b_basis, p, y);
    double step = 0.25;
    for (int iter = 0; iter < 50; ++iter) {
      bool improved = false;
      for (Index coord = 0; coord < r; ++coord) {
        for (double sign : {1.0, -1.0}) {
          Vector cand = y;
          cand(coord) += sign * step * std::max(1.0, y.norm());
          const double cand_value = power_ratio_error(a_basis, b_basis, p, cand);
          if (cand_value > value) {
            value = cand_value;
            y = cand;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
      if (step < 1e-8) break;
    }
    best = std::max(best, value);
  }

  report.distortion = best;
  return report;
}

}  // namespace lpcoreset
