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

// Noise generators.
//
// MhChain is a Metropolis-Hastings random walk whose target is the
// origin-centred hyperbolic density f(x; eps) of density.h, evaluated with
// respect to Lebesgue measure on the ball. The chain starts at the origin,
// draws an isotropic Gaussian proposal around the current point, and accepts
// when u <= f(x') / f(x_t) for u ~ U(0, 1).
//
// Two proposal constructions are available:
//
//   kInBall      x' = x_t + N(0, s^2 I), used as-is. Candidates outside the
//                ball have zero density and are rejected. Symmetric, so the
//                chain targets f exactly.
//   kTranslated  x' is lifted to the hyperboloid (x0 = sqrt(1 + |x'|^2)) and
//                mapped back into the ball, x' / (1 + x0), before the
//                acceptance test. The map contracts towards the origin and no
//                Hastings correction is applied, so this chain is biased
//                towards the origin; it is kept for comparison.
//
// SampleEuclideanLaplace draws from the multivariate density proportional to
// exp(-eps |z|) (uniform direction, Gamma(n, eps) magnitude).

#ifndef HYPERDP_SAMPLER_H_
#define HYPERDP_SAMPLER_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hyperdp/density.h"
#include "hyperdp/geometry.h"
#include "hyperdp/random.h"

namespace hyperdp {

enum class ProposalKind { kInBall, kTranslated };

inline std::string_view ProposalKindName(ProposalKind k) {
  return k == ProposalKind::kInBall ? "in-ball" : "translated";
}

inline std::optional<ProposalKind> ParseProposalKind(std::string_view s) {
  if (s == "in-ball") return ProposalKind::kInBall;
  if (s == "translated") return ProposalKind::kTranslated;
  return std::nullopt;
}

// Proposal scale and thinning under which released states are close to
// independent draws (the 1-d KS check passes reliably). Frequency-based
// verification, whose confidence slack assumes independence, uses these.
inline constexpr double kMixingProposalScale = 0.5;
inline constexpr std::int64_t kMixingThinning = 10;

struct SamplerConfig {
  std::size_t dim = 2;
  double epsilon = 1.0;
  std::int64_t burn_in = 1000;
  // Standard deviation of the isotropic Gaussian proposal.
  double proposal_scale = 0.1;
  std::uint64_t seed = 0;
  std::int64_t count = 1;
  // Chain steps between released states. 1 releases every state.
  std::int64_t thinning = 1;
  ProposalKind proposal = ProposalKind::kInBall;
  double ball_margin = kDefaultBallMargin;

  void Validate() const {
    if (dim == 0) throw std::invalid_argument("SamplerConfig: dim must be > 0");
    internal::RequirePositiveEpsilon(epsilon, "SamplerConfig");
    if (burn_in < 0) {
      throw std::invalid_argument("SamplerConfig: burn_in must be >= 0");
    }
    if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale)) {
      throw std::invalid_argument("SamplerConfig: proposal_scale must be > 0");
    }
    if (count <= 0) {
      throw std::invalid_argument("SamplerConfig: count must be > 0");
    }
    if (thinning <= 0) {
      throw std::invalid_argument("SamplerConfig: thinning must be > 0");
    }
    if (!(ball_margin > 0.0 && ball_margin < 1.0)) {
      throw std::invalid_argument("SamplerConfig: ball_margin must be in (0, 1)");
    }
  }
};

class MhChain {
 public:
  explicit MhChain(const SamplerConfig& config)
      : MhChain(config, config.seed) {}

  MhChain(const SamplerConfig& config, std::uint64_t seed)
      : config_(config),
        rng_(seed),
        state_(config.dim, 0.0),
        proposal_(config.dim, 0.0) {
    config_.Validate();
    log_density_ = 0.0;  // f(0) = 1
  }

  // Next released state: the burn-in is consumed on the first call, then
  // `thinning` steps are taken per call.
  PoincareVec Next() {
    if (!burned_in_) {
      for (std::int64_t i = 0; i < config_.burn_in; ++i) Step();
      burned_in_ = true;
    }
    for (std::int64_t i = 0; i < config_.thinning; ++i) Step();
    return PoincareVec(state_);
  }

  // Writes the next released state into `out` without allocating.
  void NextInto(std::span<double> out) {
    if (!burned_in_) {
      for (std::int64_t i = 0; i < config_.burn_in; ++i) Step();
      burned_in_ = true;
    }
    for (std::int64_t i = 0; i < config_.thinning; ++i) Step();
    std::copy(state_.begin(), state_.end(), out.begin());
  }

  std::span<const double> state() const { return state_; }
  std::int64_t steps() const { return steps_; }
  std::int64_t accepted() const { return accepted_; }
  std::int64_t clamp_count() const { return clamps_; }
  double acceptance_rate() const {
    return steps_ == 0 ? 0.0
                       : static_cast<double>(accepted_) /
                             static_cast<double>(steps_);
  }
  const SamplerConfig& config() const { return config_; }

 private:
  void Step() {
    ++steps_;
    const double s = config_.proposal_scale;
    for (std::size_t i = 0; i < state_.size(); ++i) {
      proposal_[i] = state_[i] + s * rng_.Normal();
    }
    double sq = 0.0;
    if (config_.proposal == ProposalKind::kTranslated) {
      // x' -> H^n -> B^n. Far-out proposals can round onto the boundary.
      const LorentzVec lifted = LiftToLorentz(EuclideanVec(proposal_));
      const double denom = 1.0 + lifted.time();
      for (std::size_t i = 0; i < proposal_.size(); ++i) {
        proposal_[i] = lifted.spatial()[i] / denom;
      }
      sq = internal::SquaredNorm(proposal_);
      if (sq >= 1.0) {
        const PoincareVec p =
            ProjectIntoBall(EuclideanVec(proposal_), config_.ball_margin);
        std::copy(p.coords().begin(), p.coords().end(), proposal_.begin());
        sq = p.SquaredNorm();
        ++clamps_;
      }
    } else {
      sq = internal::SquaredNorm(proposal_);
    }
    const double log_candidate =
        LogUnnormalizedDensity(sq, config_.epsilon);
    const double u = rng_.UniformOpen();
    if (log_candidate == -std::numeric_limits<double>::infinity()) return;
    const double alpha = std::exp(log_candidate - log_density_);
    if (u <= alpha) {
      state_.swap(proposal_);
      log_density_ = log_candidate;
      ++accepted_;
    }
  }

  SamplerConfig config_;
  Rng rng_;
  std::vector<double> state_;
  std::vector<double> proposal_;
  double log_density_ = 0.0;
  bool burned_in_ = false;
  std::int64_t steps_ = 0;
  std::int64_t accepted_ = 0;
  std::int64_t clamps_ = 0;
};

struct NoiseStream {
  std::vector<PoincareVec> samples;
  double acceptance_rate = 0.0;
  std::int64_t clamp_count = 0;
  // Lag-1 autocorrelation of the released states' distances from the origin.
  double lag1_autocorrelation = 0.0;
};

namespace internal {

inline double Lag1Autocorrelation(std::span<const double> x) {
  if (x.size() < 3) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    den += d * d;
    if (i + 1 < x.size()) num += d * (x[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace internal

// Runs one chain and releases `config.count` states after the burn-in.
inline NoiseStream MhSample(const SamplerConfig& config) {
  MhChain chain(config);
  NoiseStream out;
  out.samples.reserve(static_cast<std::size_t>(config.count));
  std::vector<double> radii;
  radii.reserve(static_cast<std::size_t>(config.count));
  for (std::int64_t i = 0; i < config.count; ++i) {
    out.samples.push_back(chain.Next());
    radii.push_back(2.0 * std::atanh(out.samples.back().Norm()));
  }
  out.acceptance_rate = chain.acceptance_rate();
  out.clamp_count = chain.clamp_count();
  out.lag1_autocorrelation = internal::Lag1Autocorrelation(radii);
  return out;
}

// Writes z ~ exp(-eps |z|) into `out` (out.size() is the dimension).
inline void SampleEuclideanLaplaceInto(double eps, Rng& rng,
                                       std::span<double> out) {
  const std::size_t dim = out.size();
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& v : out) {
      v = rng.Normal();
      sq += v * v;
    }
  } while (sq == 0.0);
  // Gamma(dim, eps) as a sum of dim unit exponentials.
  double magnitude = 0.0;
  for (std::size_t i = 0; i < dim; ++i) magnitude += rng.Exponential();
  magnitude /= eps;
  const double scale = magnitude / std::sqrt(sq);
  for (double& v : out) v *= scale;
}

inline EuclideanVec SampleEuclideanLaplace(std::size_t dim, double eps,
                                           Rng& rng) {
  if (dim == 0) {
    throw std::invalid_argument("SampleEuclideanLaplace: dim must be > 0");
  }
  internal::RequirePositiveEpsilon(eps, "SampleEuclideanLaplace");
  std::vector<double> z(dim);
  SampleEuclideanLaplaceInto(eps, rng, z);
  return EuclideanVec(std::move(z));
}

}  // namespace hyperdp

#endif  // HYPERDP_SAMPLER_H_
