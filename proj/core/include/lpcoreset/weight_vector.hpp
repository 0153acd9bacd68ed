#pragma once

#include "lpcoreset/common.hpp"

namespace lpcoreset {

/// Per-row nonnegative weights for a fixed p, with the one-sidedness factor
/// gamma they were certified at (1 = exact / fully one-sided).
struct WeightVector {
  double p = 2.0;
  Vector weights;
  double gamma = 1.0;

  WeightVector() = default;
  WeightVector(double p_, Vector w, double gamma_ = 1.0)
      : p(p_), weights(std::move(w)), gamma(gamma_) {}

  Index size() const { return weights.size(); }
  double operator[](Index i) const { return weights(i); }
  double sum() const { return weights.sum(); }
};

}  // namespace lpcoreset
