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

// Privacy calibration statistics estimated by repeated runs of a Mechanism.
//
// For each sampled word w and `runs` executions of M(w):
//   n_w  number of runs with M(w) = w
//   s_w  number of distinct outputs
//   k_w  hierarchy-indistinguishability count (see ComputeKw)
//
// Every word's runs use their own noise stream seeded by
// DeriveSeed(master_seed, word_index), so results do not depend on the
// sample order or on the number of worker threads.

#ifndef HYPERDP_STATS_H_
#define HYPERDP_STATS_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyperdp/embeddings.h"
#include "hyperdp/geometry.h"
#include "hyperdp/mechanism.h"
#include "hyperdp/random.h"

namespace hyperdp {

struct OutputCount {
  WordId word;
  std::int64_t count = 0;
  friend bool operator==(const OutputCount&, const OutputCount&) = default;
};

struct WordRecord {
  WordId word;
  std::int64_t runs = 0;
  std::int64_t n_w = 0;
  std::int64_t s_w = 0;
  // Only defined for hyperbolic vocabularies.
  std::optional<std::int64_t> k_w;
  // Observed outputs in increasing word order.
  std::vector<OutputCount> outputs;
};

struct StatsAggregate {
  double avg_n_w = 0.0;
  std::int64_t max_n_w = 0;
  double avg_s_w = 0.0;
  std::optional<std::int64_t> min_k_w;
};

struct PrivacyStats {
  double epsilon = 0.0;
  Geometry geometry = Geometry::kHyperbolic;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  std::vector<WordRecord> records;
  StatsAggregate aggregate;
};

// `size` distinct words drawn uniformly without replacement, returned in
// increasing id order. A size of 0 or >= the vocabulary selects every word.
inline std::vector<WordId> SampleWords(const Vocabulary& vocab, std::size_t size,
                                       std::uint64_t seed) {
  std::vector<WordId> all(vocab.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = WordId{i};
  if (size == 0 || size >= all.size()) return all;
  Rng rng(seed);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + rng.Below(all.size() - i);
    std::swap(all[i], all[j]);
  }
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

// Output counts of `runs` executions of M(w) on one fresh noise stream.
inline std::vector<OutputCount> TallyOutputs(const Mechanism& mech, WordId w,
                                             std::int64_t runs,
                                             std::uint64_t seed) {
  NoiseSource noise = mech.NewNoiseSource(seed);
  std::unordered_map<std::size_t, std::int64_t> counts;
  for (std::int64_t r = 0; r < runs; ++r) {
    ++counts[mech.PerturbWord(w, noise).index];
  }
  std::vector<OutputCount> out;
  out.reserve(counts.size());
  for (const auto& [idx, c] : counts) out.push_back({WordId{idx}, c});
  std::sort(out.begin(), out.end(),
            [](const OutputCount& a, const OutputCount& b) {
              return a.word < b.word;
            });
  return out;
}

// Hierarchy-indistinguishability count of each record.
//
// For a word w with observed output set S_w, only outputs w_hat that sit
// above w in the hierarchy (w below w_hat) act as generalizations. For each
// such w_hat, count the members of S_w lying below w_hat; k_w is the minimum
// of those counts, or 0 when no output generalizes w. The counted sets are
// subsets of S_w, so k_w <= s_w.
inline std::vector<std::int64_t> ComputeKw(std::span<const WordRecord> records,
                                           const Vocabulary& vocab) {
  if (vocab.geometry() != Geometry::kHyperbolic) {
    throw std::invalid_argument("ComputeKw: requires a hyperbolic vocabulary");
  }
  std::vector<std::int64_t> out;
  out.reserve(records.size());
  for (const WordRecord& rec : records) {
    std::optional<std::int64_t> best;
    for (const OutputCount& top : rec.outputs) {
      if (!IsBelow(rec.word, top.word, vocab)) continue;
      std::int64_t below = 0;
      for (const OutputCount& other : rec.outputs) {
        if (IsBelow(other.word, top.word, vocab)) ++below;
      }
      if (!best || below < *best) best = below;
    }
    out.push_back(best.value_or(0));
  }
  return out;
}

namespace internal {

inline WordRecord MakeRecord(WordId w, std::int64_t runs,
                             std::vector<OutputCount> outputs) {
  WordRecord rec;
  rec.word = w;
  rec.runs = runs;
  rec.s_w = static_cast<std::int64_t>(outputs.size());
  for (const OutputCount& oc : outputs) {
    if (oc.word == w) rec.n_w = oc.count;
  }
  rec.outputs = std::move(outputs);
  return rec;
}

inline void FillAggregate(PrivacyStats& stats) {
  StatsAggregate agg;
  double sum_n = 0.0, sum_s = 0.0;
  for (const WordRecord& rec : stats.records) {
    sum_n += static_cast<double>(rec.n_w);
    sum_s += static_cast<double>(rec.s_w);
    agg.max_n_w = std::max(agg.max_n_w, rec.n_w);
    if (rec.k_w) {
      agg.min_k_w = agg.min_k_w ? std::min(*agg.min_k_w, *rec.k_w) : *rec.k_w;
    }
  }
  const double count = static_cast<double>(stats.records.size());
  agg.avg_n_w = sum_n / count;
  agg.avg_s_w = sum_s / count;
  stats.aggregate = agg;
}

}  // namespace internal

inline PrivacyStats EstimateStats(const Mechanism& mech,
                                  std::span<const WordId> sample,
                                  std::int64_t runs, std::uint64_t seed,
                                  unsigned threads = 1) {
  if (sample.empty()) throw std::invalid_argument("EstimateStats: empty sample");
  if (runs < 1) throw std::invalid_argument("EstimateStats: runs must be >= 1");
  const Vocabulary& vocab = mech.vocabulary();
  for (WordId w : sample) {
    if (w.index >= vocab.size()) {
      throw std::invalid_argument("EstimateStats: sample word out of range");
    }
  }
  PrivacyStats stats;
  stats.epsilon = mech.epsilon();
  stats.geometry = vocab.geometry();
  stats.runs = runs;
  stats.seed = seed;
  stats.records.resize(sample.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const WordId w = sample[i];
      stats.records[i] = internal::MakeRecord(
          w, runs, TallyOutputs(mech, w, runs, DeriveSeed(seed, w.index)));
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, sample.size()));
  if (threads == 1) {
    work(0, sample.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (sample.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < sample.size(); b += chunk) {
      pool.emplace_back(work, b, std::min(sample.size(), b + chunk));
    }
  }

  if (vocab.geometry() == Geometry::kHyperbolic) {
    const auto kw = ComputeKw(stats.records, vocab);
    for (std::size_t i = 0; i < kw.size(); ++i) stats.records[i].k_w = kw[i];
  }
  internal::FillAggregate(stats);
  return stats;
}

struct EntropyProxies {
  // log2 s_w.
  double h0 = 0.0;
  // -log2(n_w / runs); +inf when n_w = 0.
  double h_inf = 0.0;
};

inline EntropyProxies EntropyProxiesFor(const WordRecord& rec) {
  EntropyProxies e;
  e.h0 = std::log2(static_cast<double>(rec.s_w));
  e.h_inf = rec.n_w == 0 ? std::numeric_limits<double>::infinity()
                         : std::log2(static_cast<double>(rec.runs) /
                                     static_cast<double>(rec.n_w));
  return e;
}

inline std::vector<EntropyProxies> EntropyProxiesFor(const PrivacyStats& stats) {
  std::vector<EntropyProxies> out;
  out.reserve(stats.records.size());
  for (const WordRecord& rec : stats.records) out.push_back(EntropyProxiesFor(rec));
  return out;
}

// ---------------------------------------------------------------------------
// Hyperbolic vs Euclidean calibration.

struct CalibrationOptions {
  double hyperbolic_epsilon = 1.0;
  // Candidate Euclidean epsilons; non-finite and non-positive values are
  // skipped.
  std::vector<double> grid;
  std::int64_t runs = 1000;
  // Empty selects every word.
  std::vector<WordId> sample;
  std::uint64_t seed = 0;
  // Geometric bisection steps between the grid points that bracket the
  // hyperbolic worst case. 0 keeps the pure grid result.
  int refine_iterations = 8;
  // Noise and sampler settings shared by both sides; epsilon is overridden.
  MechanismConfig mechanism;
  unsigned threads = 1;
};

struct CalibrationPoint {
  double epsilon = 0.0;
  std::int64_t worst_n_w = 0;
  double expected_n_w = 0.0;
};

struct CalibrationReport {
  double hyperbolic_epsilon = 0.0;
  std::int64_t hyperbolic_worst_n_w = 0;
  double hyperbolic_expected_n_w = 0.0;
  double euclidean_epsilon = 0.0;
  std::int64_t euclidean_worst_n_w = 0;
  double euclidean_expected_n_w = 0.0;
  // |euclidean worst - hyperbolic worst| / hyperbolic worst.
  double worst_case_gap = 0.0;
  std::int64_t runs = 0;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
  // Every Euclidean epsilon evaluated, in evaluation order.
  std::vector<CalibrationPoint> evaluations;
};

inline CalibrationReport CalibrateEuclidean(const Vocabulary& hyp,
                                            const Vocabulary& euc,
                                            const CalibrationOptions& opts) {
  if (hyp.geometry() != Geometry::kHyperbolic ||
      euc.geometry() != Geometry::kEuclidean) {
    throw std::invalid_argument(
        "CalibrateEuclidean: expected a hyperbolic and a Euclidean vocabulary");
  }
  if (hyp.words() != euc.words()) {
    throw std::invalid_argument(
        "CalibrateEuclidean: vocabularies must list the same words in order");
  }
  std::vector<double> grid;
  for (double e : opts.grid) {
    if (std::isfinite(e) && e > 0.0) grid.push_back(e);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) {
    throw std::invalid_argument("CalibrateEuclidean: no usable grid epsilon");
  }
  const std::vector<WordId> sample =
      opts.sample.empty() ? SampleWords(hyp, 0, 0) : opts.sample;

  auto run = [&](const Vocabulary& vocab, double eps) {
    MechanismConfig cfg = opts.mechanism;
    cfg.epsilon = eps;
    const Mechanism mech(vocab, cfg);
    const PrivacyStats s =
        EstimateStats(mech, sample, opts.runs, opts.seed, opts.threads);
    return CalibrationPoint{eps, s.aggregate.max_n_w, s.aggregate.avg_n_w};
  };

  CalibrationReport report;
  report.hyperbolic_epsilon = opts.hyperbolic_epsilon;
  report.runs = opts.runs;
  report.sample_size = sample.size();
  report.seed = opts.seed;
  const CalibrationPoint h = run(hyp, opts.hyperbolic_epsilon);
  report.hyperbolic_worst_n_w = h.worst_n_w;
  report.hyperbolic_expected_n_w = h.expected_n_w;
  const auto target = static_cast<double>(h.worst_n_w);

  auto gap = [&](const CalibrationPoint& p) {
    return std::abs(static_cast<double>(p.worst_n_w) - target);
  };
  std::optional<CalibrationPoint> best;
  auto consider = [&](const CalibrationPoint& p) {
    report.evaluations.push_back(p);
    if (!best || gap(p) < gap(*best) ||
        (gap(p) == gap(*best) && p.epsilon < best->epsilon)) {
      best = p;
    }
  };

  std::vector<CalibrationPoint> on_grid;
  for (double e : grid) {
    on_grid.push_back(run(euc, e));
    consider(on_grid.back());
  }

  // Worst-case N_w grows with epsilon; refine inside the first bracket.
  for (std::size_t i = 0; i + 1 < on_grid.size() && opts.refine_iterations > 0;
       ++i) {
    CalibrationPoint lo = on_grid[i], hi = on_grid[i + 1];
    if (!(static_cast<double>(lo.worst_n_w) < target &&
          target < static_cast<double>(hi.worst_n_w))) {
      continue;
    }
    for (int it = 0; it < opts.refine_iterations; ++it) {
      const CalibrationPoint mid = run(euc, std::sqrt(lo.epsilon * hi.epsilon));
      consider(mid);
      if (static_cast<double>(mid.worst_n_w) < target) {
        lo = mid;
      } else if (static_cast<double>(mid.worst_n_w) > target) {
        hi = mid;
      } else {
        break;
      }
    }
    break;
  }

  report.euclidean_epsilon = best->epsilon;
  report.euclidean_worst_n_w = best->worst_n_w;
  report.euclidean_expected_n_w = best->expected_n_w;
  report.worst_case_gap = target > 0.0 ? gap(*best) / target : gap(*best);
  return report;
}

// ---------------------------------------------------------------------------
// Empirical check of Pr[M(w) = o] / Pr[M(w') = o] <= exp(eps d(w, w')).

// Upper-tail standard normal quantile: x with P(Z > x) = p, for p in (0, 1).
inline double NormalUpperQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("NormalUpperQuantile: p must be in (0, 1)");
  }
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double WordDistance(WordId a, WordId b, const Vocabulary& vocab) {
  if (vocab.geometry() == Geometry::kHyperbolic) {
    return PoincareDistance(vocab.point(a), vocab.point(b));
  }
  return std::sqrt(internal::SquaredDistance(vocab.row(a), vocab.row(b)));
}

enum class DpVerdict { kPass, kFail, kInsufficientSupport };

inline std::string_view DpVerdictName(DpVerdict v) {
  switch (v) {
    case DpVerdict::kPass:
      return "PASS";
    case DpVerdict::kFail:
      return "FAIL";
    case DpVerdict::kInsufficientSupport:
      return "INSUFFICIENT_SUPPORT";
  }
  return "?";
}

struct DpCheckOptions {
  // Minimum observations of an output on each side before it is compared.
  std::int64_t support_threshold = 50;
  // Simultaneous confidence over all compared outputs (Bonferroni).
  double confidence = 0.99;
};

struct DpRatioRow {
  WordId output;
  std::int64_t count = 0;
  std::int64_t other_count = 0;
  bool supported = false;
  double log_ratio = 0.0;
  double slack = 0.0;
  bool within = true;
};

struct DpRatioReport {
  WordId word;
  WordId other;
  double epsilon = 0.0;
  double distance = 0.0;
  // eps * d(w, w').
  double bound = 0.0;
  std::int64_t runs = 0;
  std::int64_t support_threshold = 0;
  double z = 0.0;
  std::size_t supported_outputs = 0;
  double max_log_ratio = 0.0;
  // max over supported outputs of |log ratio| - bound - slack.
  double max_excess = -std::numeric_limits<double>::infinity();
  DpVerdict verdict = DpVerdict::kInsufficientSupport;
  std::vector<DpRatioRow> rows;
};

// Runs M(w) and M(w') `runs` times each on independent streams and compares
// empirical output probabilities. The slack of an output is the
// delta-method half-width z * sqrt((1 - p)/c + (1 - p')/c') of its log
// ratio, with z the two-sided Bonferroni quantile at `confidence`.
inline DpRatioReport EmpiricalDpRatio(const Mechanism& mech, WordId w,
                                      WordId other, std::int64_t runs,
                                      std::uint64_t seed,
                                      const DpCheckOptions& opts = {}) {
  if (runs < 1) throw std::invalid_argument("EmpiricalDpRatio: runs must be >= 1");
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0)) {
    throw std::invalid_argument("EmpiricalDpRatio: confidence must be in (0, 1)");
  }
  const Vocabulary& vocab = mech.vocabulary();
  DpRatioReport rep;
  rep.word = w;
  rep.other = other;
  rep.epsilon = mech.epsilon();
  rep.distance = WordDistance(w, other, vocab);
  rep.bound = rep.epsilon * rep.distance;
  rep.runs = runs;
  rep.support_threshold = opts.support_threshold;

  const auto a = TallyOutputs(mech, w, runs, DeriveSeed(seed, 0));
  const auto b = TallyOutputs(mech, other, runs, DeriveSeed(seed, 1));
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    DpRatioRow row;
    if (j >= b.size() || (i < a.size() && a[i].word < b[j].word)) {
      row.output = a[i].word;
      row.count = a[i++].count;
    } else if (i >= a.size() || b[j].word < a[i].word) {
      row.output = b[j].word;
      row.other_count = b[j++].count;
    } else {
      row.output = a[i].word;
      row.count = a[i++].count;
      row.other_count = b[j++].count;
    }
    row.supported = row.count >= opts.support_threshold &&
                    row.other_count >= opts.support_threshold;
    if (row.supported) ++rep.supported_outputs;
    rep.rows.push_back(row);
  }
  if (rep.supported_outputs == 0) {
    rep.verdict = DpVerdict::kInsufficientSupport;
    return rep;
  }
  const double alpha = 1.0 - opts.confidence;
  rep.z = NormalUpperQuantile(alpha / (2.0 * static_cast<double>(rep.supported_outputs)));
  const auto n = static_cast<double>(runs);
  bool all_within = true;
  for (DpRatioRow& row : rep.rows) {
    if (!row.supported) continue;
    const auto c1 = static_cast<double>(row.count);
    const auto c2 = static_cast<double>(row.other_count);
    row.log_ratio = std::log(c1 / c2);
    row.slack = rep.z * std::sqrt((1.0 - c1 / n) / c1 + (1.0 - c2 / n) / c2);
    const double excess = std::abs(row.log_ratio) - rep.bound - row.slack;
    row.within = excess <= 0.0;
    all_within = all_within && row.within;
    rep.max_log_ratio = std::max(rep.max_log_ratio, std::abs(row.log_ratio));
    rep.max_excess = std::max(rep.max_excess, excess);
  }
  rep.verdict = all_within ? DpVerdict::kPass : DpVerdict::kFail;
  return rep;
}

// ---------------------------------------------------------------------------
// Plausible deniability: several inputs produce one output with comparable
// probability.

struct DeniabilityWitness {
  WordId output;
  // Inputs whose runs produced `output` at least `min_count` times.
  std::vector<WordId> inputs;
  // exp(eps * largest pairwise distance among `inputs`).
  double gamma = 1.0;
  // Largest ratio of output probabilities among `inputs`.
  double max_ratio = 1.0;
  bool Holds(std::size_t k = 2) const {
    return inputs.size() >= k && max_ratio <= gamma;
  }
};

inline DeniabilityWitness FindDeniabilityWitness(const PrivacyStats& stats,
                                                 WordId output,
                                                 const Vocabulary& vocab,
                                                 std::int64_t min_count = 50) {
  DeniabilityWitness wit;
  wit.output = output;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
  for (const WordRecord& rec : stats.records) {
    for (const OutputCount& oc : rec.outputs) {
      if (oc.word == output && oc.count >= min_count) {
        wit.inputs.push_back(rec.word);
        lo = std::min(lo, oc.count);
        hi = std::max(hi, oc.count);
      }
    }
  }
  if (wit.inputs.size() < 2) return wit;
  double dmax = 0.0;
  for (std::size_t i = 0; i < wit.inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < wit.inputs.size(); ++j) {
      dmax = std::max(dmax, WordDistance(wit.inputs[i], wit.inputs[j], vocab));
    }
  }
  wit.gamma = std::exp(stats.epsilon * dmax);
  wit.max_ratio = static_cast<double>(hi) / static_cast<double>(lo);
  return wit;
}

}  // namespace hyperdp

#endif  // HYPERDP_STATS_H_
