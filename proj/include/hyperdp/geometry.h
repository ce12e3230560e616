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

// Poincare-ball and Lorentz (hyperboloid) models of hyperbolic space.
//
// Three value types carry coordinates with their model invariants checked at
// construction:
//   EuclideanVec  finite point of R^n
//   PoincareVec   finite point of the open unit ball B^n
//   LorentzVec    point (x0, x') of the upper hyperboloid, <x, x>_L = -1
//
// Every function here is pure. Numerical events that are corrected silently
// (arcosh arguments rounded below 1) are tallied in an optional Diagnostics
// sink supplied by the caller.

#ifndef HYPERDP_GEOMETRY_H_
#define HYPERDP_GEOMETRY_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hyperdp {

// Default retraction margin for points that leave the ball.
inline constexpr double kDefaultBallMargin = 1e-5;

// Absolute tolerance of the hyperboloid constraint for unit-scale points.
inline constexpr double kHyperboloidTolerance = 1e-9;

struct Diagnostics {
  // Number of arcosh arguments below 1 that were clamped to 1.
  std::int64_t arcosh_clamps = 0;
};

namespace internal {

inline double SquaredNorm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum;
}

inline double SquaredDistance(std::span<const double> u,
                              std::span<const double> v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    sum += d * d;
  }
  return sum;
}

inline void RequireFinite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) +
                                  ": coordinates must be finite");
    }
  }
}

inline void RequireSameDim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
  }
}

// Hyperbolic separation term 2|u-v|^2 / ((1-|u|^2)(1-|v|^2)) of the
// Poincare distance, given the precomputed squared norms.
inline double PoincareDelta(std::span<const double> u, double u_sq,
                            std::span<const double> v, double v_sq) {
  return 2.0 * SquaredDistance(u, v) / ((1.0 - u_sq) * (1.0 - v_sq));
}

}  // namespace internal

class EuclideanVec {
 public:
  EuclideanVec() = default;
  explicit EuclideanVec(std::vector<double> coords)
      : coords_(std::move(coords)) {
    internal::RequireFinite(coords_, "EuclideanVec");
  }
  EuclideanVec(std::initializer_list<double> coords)
      : EuclideanVec(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  double SquaredNorm() const { return internal::SquaredNorm(coords_); }
  double Norm() const { return std::sqrt(SquaredNorm()); }

  friend bool operator==(const EuclideanVec&, const EuclideanVec&) = default;

 private:
  std::vector<double> coords_;
};

class PoincareVec {
 public:
  // The origin of B^n.
  explicit PoincareVec(std::size_t dim) : coords_(dim, 0.0) {}
  explicit PoincareVec(std::vector<double> coords)
      : coords_(std::move(coords)) {
    internal::RequireFinite(coords_, "PoincareVec");
    squared_norm_ = internal::SquaredNorm(coords_);
    if (!(squared_norm_ < 1.0)) {
      throw std::invalid_argument("PoincareVec: norm must be < 1");
    }
  }
  PoincareVec(std::initializer_list<double> coords)
      : PoincareVec(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  double SquaredNorm() const { return squared_norm_; }
  double Norm() const { return std::sqrt(squared_norm_); }
  EuclideanVec AsEuclidean() const { return EuclideanVec(coords_); }

  friend bool operator==(const PoincareVec& a, const PoincareVec& b) {
    return a.coords_ == b.coords_;
  }

 private:
  std::vector<double> coords_;
  double squared_norm_ = 0.0;
};

class LorentzVec {
 public:
  // The hyperboloid base point [1, 0, ..., 0] for spatial dimension n.
  static LorentzVec Origin(std::size_t n) {
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    return LorentzVec(std::move(c));
  }

  // Validates x0 > 0 and the hyperboloid constraint. The tolerance scales
  // with x0^2 since the constraint is a difference of two such terms.
  explicit LorentzVec(std::vector<double> coords)
      : coords_(std::move(coords)) {
    if (coords_.size() < 2) {
      throw std::invalid_argument("LorentzVec: need at least 2 coordinates");
    }
    internal::RequireFinite(coords_, "LorentzVec");
    if (!(coords_[0] > 0.0)) {
      throw std::invalid_argument("LorentzVec: time coordinate must be > 0");
    }
    const double x0 = coords_[0];
    const double self = -x0 * x0 + internal::SquaredNorm(spatial());
    if (std::abs(self + 1.0) > kHyperboloidTolerance * std::max(1.0, x0 * x0)) {
      throw std::invalid_argument("LorentzVec: point is off the hyperboloid");
    }
  }
  LorentzVec(std::initializer_list<double> coords)
      : LorentzVec(std::vector<double>(coords)) {}

  // Spatial dimension n; the vector has n + 1 coordinates.
  std::size_t dim() const { return coords_.size() - 1; }
  std::span<const double> coords() const { return coords_; }
  double time() const { return coords_[0]; }
  std::span<const double> spatial() const {
    return std::span<const double>(coords_).subspan(1);
  }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const LorentzVec&, const LorentzVec&) = default;

 private:
  std::vector<double> coords_;
};

// arcosh(z) = ln(z + sqrt(z^2 - 1)), with z < 1 clamped to 1 and counted.
inline double Arcosh(double z, Diagnostics* diag = nullptr) {
  if (z < 1.0) {
    if (diag != nullptr) ++diag->arcosh_clamps;
    z = 1.0;
  }
  return std::log(z + std::sqrt(z * z - 1.0));
}

// arcosh(1 + delta) for delta >= 0, without forming 1 + delta.
inline double ArcoshOnePlus(double delta) {
  return std::log1p(delta + std::sqrt(delta * (delta + 2.0)));
}

// Minkowski bilinear form on raw coordinates (index 0 is time).
inline double LorentzInner(std::span<const double> u,
                           std::span<const double> v) {
  internal::RequireSameDim(u.size(), v.size(), "LorentzInner");
  double sum = -u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) sum += u[i] * v[i];
  return sum;
}

inline double LorentzInner(const LorentzVec& u, const LorentzVec& v) {
  return LorentzInner(u.coords(), v.coords());
}

// Places x' on the hyperboloid by setting x0 = sqrt(1 + |x'|^2).
inline LorentzVec LiftToLorentz(const EuclideanVec& x) {
  std::vector<double> c;
  c.reserve(x.dim() + 1);
  c.push_back(std::sqrt(1.0 + x.SquaredNorm()));
  c.insert(c.end(), x.coords().begin(), x.coords().end());
  return LorentzVec(std::move(c));
}

// Stereographic projection through [-1, 0, ..., 0]: x' / (1 + x0).
inline PoincareVec LorentzToPoincare(const LorentzVec& x) {
  const double denom = 1.0 + x.time();
  std::vector<double> c(x.spatial().begin(), x.spatial().end());
  for (double& v : c) v /= denom;
  return PoincareVec(std::move(c));
}

// Inverse of LorentzToPoincare: (1 + |x|^2, 2x) / (1 - |x|^2).
inline LorentzVec PoincareToLorentz(const PoincareVec& x) {
  const double sq = x.SquaredNorm();
  const double denom = 1.0 - sq;
  std::vector<double> c;
  c.reserve(x.dim() + 1);
  c.push_back((1.0 + sq) / denom);
  for (double v : x.coords()) c.push_back(2.0 * v / denom);
  return LorentzVec(std::move(c));
}

// arcosh(1 + 2|u-v|^2 / ((1-|u|^2)(1-|v|^2))). The argument offset is
// non-negative by construction, so no clamping is needed on this route.
inline double PoincareDistance(const PoincareVec& u, const PoincareVec& v) {
  internal::RequireSameDim(u.dim(), v.dim(), "PoincareDistance");
  return ArcoshOnePlus(internal::PoincareDelta(u.coords(), u.SquaredNorm(),
                                               v.coords(), v.SquaredNorm()));
}

// arcosh(-<u, v>_L), evaluated as arcosh(1 + <u - v, u - v>_L / 2). On the
// hyperboloid the two agree, and the difference form avoids cancellation for
// nearby points (it is exactly 0 for u = v). Rounding can still make the
// offset slightly negative; it is then clamped to 0 and reported via `diag`.
inline double LorentzDistance(const LorentzVec& u, const LorentzVec& v,
                              Diagnostics* diag = nullptr) {
  internal::RequireSameDim(u.dim(), v.dim(), "LorentzDistance");
  const auto uc = u.coords(), vc = v.coords();
  const double dt = uc[0] - vc[0];
  double offset = -dt * dt;
  for (std::size_t i = 1; i < uc.size(); ++i) {
    const double d = uc[i] - vc[i];
    offset += d * d;
  }
  offset *= 0.5;
  if (offset < 0.0) {
    if (diag != nullptr) ++diag->arcosh_clamps;
    offset = 0.0;
  }
  return ArcoshOnePlus(offset);
}

// Retracts points with |x| >= 1 to radius (1 - margin); leaves interior
// points untouched.
inline PoincareVec ProjectIntoBall(const EuclideanVec& x,
                                   double margin = kDefaultBallMargin) {
  if (!(margin > 0.0 && margin < 1.0)) {
    throw std::invalid_argument("ProjectIntoBall: margin must be in (0, 1)");
  }
  std::vector<double> c(x.coords().begin(), x.coords().end());
  const double sq = x.SquaredNorm();
  if (sq >= 1.0) {
    const double scale = (1.0 - margin) / std::sqrt(sq);
    for (double& v : c) v *= scale;
  }
  return PoincareVec(std::move(c));
}

// Mobius addition a (+) z in the ball. Maps the origin to `a` and is an
// isometry of the Poincare metric.
inline EuclideanVec MobiusAdd(const PoincareVec& a, const PoincareVec& z) {
  internal::RequireSameDim(a.dim(), z.dim(), "MobiusAdd");
  double az = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) az += a[i] * z[i];
  const double a2 = a.SquaredNorm();
  const double z2 = z.SquaredNorm();
  const double ca = 1.0 + 2.0 * az + z2;
  const double cz = 1.0 - a2;
  const double denom = 1.0 + 2.0 * az + a2 * z2;
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out[i] = (ca * a[i] + cz * z[i]) / denom;
  }
  return EuclideanVec(std::move(out));
}

}  // namespace hyperdp

#endif  // HYPERDP_GEOMETRY_H_
