// Copyright 2026 The HyperDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Origin-centred hyperbolic Laplace density on the Poincare ball,
//
//   f(x; eps) = exp(-eps * d(0, x)) = ((1 + |x|) / (1 - |x|))^(-eps),
//
// and its one-dimensional normalization
//
//   Z(eps) = integral_{-1}^{1} f(x; eps) dx = 2 * 2F1(1, eps; 2 + eps; -1)
//                                              / (1 + eps).
//
// The n-dimensional normalizer is not needed anywhere: the sampler only uses
// ratios f(x') / f(x).

#ifndef HYPERDP_DENSITY_H_
#define HYPERDP_DENSITY_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperdp/geometry.h"

namespace hyperdp {

class HyperbolicDensity {
 public:
  HyperbolicDensity(double epsilon, std::size_t dim)
      : epsilon_(epsilon), dim_(dim) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("HyperbolicDensity: epsilon must be > 0");
    }
    if (dim == 0) {
      throw std::invalid_argument("HyperbolicDensity: dim must be positive");
    }
  }

  double epsilon() const { return epsilon_; }
  std::size_t dim() const { return dim_; }

  // Z(eps), computed on first use and cached.
  double normalization() const;
  // Normalized one-dimensional density; avoids re-summing Z per call.
  double Pdf1d(double x) const;

 private:
  double epsilon_;
  std::size_t dim_;
  mutable double z_ = 0.0;
};

namespace internal {

inline void RequirePositiveEpsilon(double eps, const char* what) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument(std::string(what) +
                                ": epsilon must be finite and > 0");
  }
}

}  // namespace internal

// ((1 + r) / (1 - r))^(-eps) for r = |x|, written as (-2/(r - 1) - 1)^(-eps).
// Underflows to 0 as r -> 1.
inline double UnnormalizedDensity(const PoincareVec& x, double eps) {
  internal::RequirePositiveEpsilon(eps, "UnnormalizedDensity");
  const double r = x.Norm();
  return std::pow(-2.0 / (r - 1.0) - 1.0, -eps);
}

// log f(x; eps) = -2 eps artanh(|x|); -inf for |x| >= 1.
inline double LogUnnormalizedDensity(double squared_norm, double eps) {
  if (!(squared_norm < 1.0)) return -std::numeric_limits<double>::infinity();
  return -2.0 * eps * std::atanh(std::sqrt(squared_norm));
}

inline double LogUnnormalizedDensity(const PoincareVec& x, double eps) {
  internal::RequirePositiveEpsilon(eps, "LogUnnormalizedDensity");
  return LogUnnormalizedDensity(x.SquaredNorm(), eps);
}

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesOptions {
  // Stop once a term falls below this magnitude.
  double term_tolerance = 1e-14;
  // Plain terms summed before switching to Euler averaging of the tail.
  std::int64_t max_plain_terms = 100000;
  // Averaging levels allowed once the plain budget is spent.
  int max_euler_levels = 40;
};

struct SeriesResult {
  double value = 0.0;
  std::int64_t terms = 0;
  bool accelerated = false;
  // Last two plain partial sums; the limit of the alternating series lies
  // between them.
  double lower = 0.0;
  double upper = 0.0;
};

// 2F1(1, eps; 2 + eps; -1) = sum_n (eps)_n / (2 + eps)_n (-1)^n.
//
// Term magnitudes are eps(eps+1) / ((eps+n)(eps+n+1)), so the series is
// alternating with completely monotone terms and converges like n^-2. Plain
// summation is used while it reaches `term_tolerance` within the budget; the
// remaining tail is then summed by repeated averaging of partial sums
// (Euler transformation), which converges geometrically for such series.
inline SeriesResult Hyp2F1AtMinusOne(double eps,
                                     const SeriesOptions& opts = {}) {
  internal::RequirePositiveEpsilon(eps, "Hyp2F1AtMinusOne");
  SeriesResult out;
  double term = 1.0;
  double sum = 0.0;
  double prev_sum = 0.0;
  std::int64_t n = 0;
  for (; n < opts.max_plain_terms; ++n) {
    prev_sum = sum;
    sum += term;
    const double next =
        -term * (eps + static_cast<double>(n)) / (2.0 + eps + static_cast<double>(n));
    if (std::abs(next) < opts.term_tolerance) {
      out.value = sum;
      out.terms = n + 1;
      out.lower = std::min(prev_sum, sum);
      out.upper = std::max(prev_sum, sum);
      return out;
    }
    term = next;
  }

  out.lower = std::min(prev_sum, sum);
  out.upper = std::max(prev_sum, sum);
  out.accelerated = true;

  // Partial sums S_N, S_{N+1}, ..., then repeated pairwise means.
  const int width = opts.max_euler_levels + 1;
  std::vector<double> level;
  level.reserve(static_cast<std::size_t>(width));
  level.push_back(sum);
  for (int k = 1; k < width; ++k, ++n) {
    sum += term;
    level.push_back(sum);
    term = -term * (eps + static_cast<double>(n)) /
           (2.0 + eps + static_cast<double>(n));
  }
  double prev_estimate = level.front();
  for (int depth = 1; depth < width; ++depth) {
    for (std::size_t i = 0; i + 1 < level.size(); ++i) {
      level[i] = 0.5 * (level[i] + level[i + 1]);
    }
    level.pop_back();
    const double estimate = level.front();
    if (std::abs(estimate - prev_estimate) <
        opts.term_tolerance * std::max(1.0, std::abs(estimate))) {
      out.value = estimate;
      out.terms = n;
      return out;
    }
    prev_estimate = estimate;
  }
  throw ConvergenceError("Hyp2F1AtMinusOne: no convergence for eps = " +
                         std::to_string(eps));
}

// 2 * 2F1(1, eps; 2 + eps; -1) / (1 + eps).
inline double NormalizationZ(double eps, const SeriesOptions& opts = {}) {
  return 2.0 * Hyp2F1AtMinusOne(eps, opts).value / (1.0 + eps);
}

// One-dimensional normalized density on (-1, 1).
inline double Pdf1d(double x, double eps) {
  if (!(std::abs(x) < 1.0)) {
    throw std::invalid_argument("Pdf1d: |x| must be < 1");
  }
  return UnnormalizedDensity(PoincareVec{x}, eps) / NormalizationZ(eps);
}

inline double HyperbolicDensity::normalization() const {
  if (z_ == 0.0) z_ = NormalizationZ(epsilon_);
  return z_;
}

inline double HyperbolicDensity::Pdf1d(double x) const {
  if (!(std::abs(x) < 1.0)) {
    throw std::invalid_argument("Pdf1d: |x| must be < 1");
  }
  return UnnormalizedDensity(PoincareVec{x}, epsilon_) / normalization();
}

}  // namespace hyperdp

#endif  // HYPERDP_DENSITY_H_
