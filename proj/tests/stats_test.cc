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

#include "hyperdp/stats.h"

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hyperdp/embeddings.h"
#include "hyperdp/mechanism.h"

namespace hyperdp {
namespace {

const Vocabulary& Fixture(Geometry g = Geometry::kHyperbolic) {
  static const Vocabulary* hyp =
      new Vocabulary(GenerateSyntheticTaxonomy(TaxonomyOptions{}).vocabulary);
  static const Vocabulary* euc = [] {
    TaxonomyOptions opts;
    opts.geometry = Geometry::kEuclidean;
    return new Vocabulary(GenerateSyntheticTaxonomy(opts).vocabulary);
  }();
  return g == Geometry::kHyperbolic ? *hyp : *euc;
}

WordId Id(std::string_view w) { return Fixture().Require(w); }

MechanismConfig Config(double eps) {
  MechanismConfig c;
  c.epsilon = eps;
  return c;
}

std::vector<WordId> AllWords() { return SampleWords(Fixture(), 0, 0); }

// Record for `w` with one observation of each output.
WordRecord RecordWithOutputs(std::string_view w,
                             std::initializer_list<std::string_view> outputs) {
  std::set<WordId> ids;
  for (std::string_view o : outputs) ids.insert(Id(o));
  std::vector<OutputCount> counts;
  for (WordId id : ids) counts.push_back({id, 1});
  return internal::MakeRecord(Id(w), static_cast<std::int64_t>(ids.size()),
                              counts);
}

TEST(SampleWordsTest, DistinctSortedAndDeterministic) {
  const auto a = SampleWords(Fixture(), 10, 4);
  ASSERT_EQ(a.size(), 10u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::set<WordId>(a.begin(), a.end()).size(), 10u);
  EXPECT_EQ(a, SampleWords(Fixture(), 10, 4));
  EXPECT_NE(a, SampleWords(Fixture(), 10, 5));
  EXPECT_EQ(SampleWords(Fixture(), 0, 1).size(), Fixture().size());
  EXPECT_EQ(SampleWords(Fixture(), 1000, 1).size(), Fixture().size());
}

TEST(ComputeKwTest, OnlySelfGivesZero) {
  const std::vector<WordRecord> recs = {
      RecordWithOutputs("root_0_0_0", {"root_0_0_0"}),
      RecordWithOutputs("root", {"root"})};
  EXPECT_EQ(ComputeKw(recs, Fixture()), (std::vector<std::int64_t>{0, 0}));
}

TEST(ComputeKwTest, AncestorOutputCountsLeavesBelowIt) {
  // Outputs of a leaf: itself, a sibling-branch leaf, its depth-1 ancestor
  // root_0 and another depth-1 node. Under root_0 (and under root_1) the two
  // observed leaves lie below, so k_w = 2.
  const std::vector<WordRecord> recs = {RecordWithOutputs(
      "root_0_0_0", {"root_0_0_0", "root_0_1_2", "root_0", "root_1"})};
  const auto kw = ComputeKw(recs, Fixture());
  EXPECT_EQ(kw[0], 2);
  EXPECT_LE(kw[0], recs[0].s_w);

  // Adding a depth-2 output: below root_0_0 are the 2 leaves, below root_0
  // are 3 words, so the minimum stays 2.
  const std::vector<WordRecord> more = {RecordWithOutputs(
      "root_0_0_0", {"root_0_0_0", "root_0_1_2", "root_0_0", "root_0"})};
  EXPECT_EQ(ComputeKw(more, Fixture())[0], 2);
}

TEST(ComputeKwTest, RejectsEuclidean) {
  EXPECT_THROW(ComputeKw({}, Fixture(Geometry::kEuclidean)),
               std::invalid_argument);
}

TEST(EstimateStatsTest, ValidatesArguments) {
  const Mechanism mech(Fixture(), Config(1.0));
  EXPECT_THROW(EstimateStats(mech, {}, 10, 0), std::invalid_argument);
  const std::vector<WordId> one = {Id("root")};
  EXPECT_THROW(EstimateStats(mech, one, 0, 0), std::invalid_argument);
  const std::vector<WordId> bad = {WordId{Fixture().size()}};
  EXPECT_THROW(EstimateStats(mech, bad, 10, 0), std::invalid_argument);
}

TEST(EstimateStatsTest, HugeEpsilonIsNearlyNoiseless) {
  for (Geometry g : {Geometry::kHyperbolic, Geometry::kEuclidean}) {
    const Mechanism mech(Fixture(g), Config(1e6));
    const PrivacyStats s = EstimateStats(mech, AllWords(), 1000, 3);
    for (const WordRecord& r : s.records) {
      EXPECT_GT(static_cast<double>(r.n_w) / r.runs, 0.99);
      EXPECT_GE(r.s_w, 1);
      EXPECT_LE(r.s_w, 2);
    }
    EXPECT_EQ(s.records.front().k_w.has_value(), g == Geometry::kHyperbolic);
  }
}

TEST(EstimateStatsTest, RecordInvariantsAndAggregates) {
  const Mechanism mech(Fixture(), Config(0.5));
  const PrivacyStats s = EstimateStats(mech, AllWords(), 300, 11);
  double sum_n = 0, sum_s = 0;
  std::int64_t max_n = 0, min_k = s.runs;
  for (const WordRecord& r : s.records) {
    std::int64_t total = 0;
    for (const OutputCount& oc : r.outputs) total += oc.count;
    EXPECT_EQ(total, r.runs);
    EXPECT_GE(r.n_w, 0);
    EXPECT_LE(r.n_w, r.runs);
    EXPECT_GE(r.s_w, 1);
    EXPECT_LE(r.s_w, r.runs);
    ASSERT_TRUE(r.k_w.has_value());
    EXPECT_LE(*r.k_w, r.s_w);
    sum_n += r.n_w;
    sum_s += r.s_w;
    max_n = std::max(max_n, r.n_w);
    min_k = std::min(min_k, *r.k_w);
  }
  const double n = static_cast<double>(s.records.size());
  EXPECT_DOUBLE_EQ(s.aggregate.avg_n_w, sum_n / n);
  EXPECT_DOUBLE_EQ(s.aggregate.avg_s_w, sum_s / n);
  EXPECT_EQ(s.aggregate.max_n_w, max_n);
  EXPECT_EQ(s.aggregate.min_k_w, min_k);
}

TEST(EstimateStatsTest, IdenticalAcrossThreadCounts) {
  const Mechanism mech(Fixture(), Config(1.0));
  const PrivacyStats serial = EstimateStats(mech, AllWords(), 200, 5, 1);
  for (unsigned threads : {2u, 3u, 7u}) {
    const PrivacyStats par = EstimateStats(mech, AllWords(), 200, 5, threads);
    ASSERT_EQ(par.records.size(), serial.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
      EXPECT_EQ(par.records[i].outputs, serial.records[i].outputs);
      EXPECT_EQ(par.records[i].k_w, serial.records[i].k_w);
    }
  }
}

TEST(EstimateStatsTest, TrendsOverEpsilon) {
  const auto words = AllWords();
  const PrivacyStats loose =
      EstimateStats(Mechanism(Fixture(), Config(0.125)), words, 1000, 2);
  const PrivacyStats tight =
      EstimateStats(Mechanism(Fixture(), Config(8.0)), words, 1000, 2);
  EXPECT_LT(loose.aggregate.avg_n_w, tight.aggregate.avg_n_w);
  EXPECT_GT(loose.aggregate.avg_s_w, tight.aggregate.avg_s_w);
}

TEST(EntropyProxiesTest, Examples) {
  WordRecord r;
  r.runs = 100;
  r.s_w = 1;
  r.n_w = 100;
  EXPECT_EQ(EntropyProxiesFor(r).h0, 0.0);
  EXPECT_EQ(EntropyProxiesFor(r).h_inf, 0.0);
  r.s_w = 8;
  r.n_w = 25;
  EXPECT_DOUBLE_EQ(EntropyProxiesFor(r).h0, 3.0);
  EXPECT_DOUBLE_EQ(EntropyProxiesFor(r).h_inf, 2.0);
  r.n_w = 0;
  EXPECT_EQ(EntropyProxiesFor(r).h_inf, INFINITY);
}

TEST(EntropyProxiesTest, PerRecord) {
  const Mechanism mech(Fixture(), Config(1.0));
  const PrivacyStats s = EstimateStats(mech, AllWords(), 100, 1);
  const auto e = EntropyProxiesFor(s);
  ASSERT_EQ(e.size(), s.records.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_DOUBLE_EQ(e[i].h0, std::log2(static_cast<double>(s.records[i].s_w)));
    EXPECT_GE(e[i].h_inf, 0.0);
  }
}

CalibrationOptions SmallCalibration(double hyp_eps, std::vector<double> grid) {
  CalibrationOptions o;
  o.hyperbolic_epsilon = hyp_eps;
  o.grid = std::move(grid);
  o.runs = 300;
  o.seed = 6;
  return o;
}

TEST(CalibrateEuclideanTest, SingleGridPointPassesThrough) {
  CalibrationOptions o = SmallCalibration(1.0, {0.7});
  const CalibrationReport r = CalibrateEuclidean(
      Fixture(), Fixture(Geometry::kEuclidean), o);
  EXPECT_EQ(r.euclidean_epsilon, 0.7);
  ASSERT_EQ(r.evaluations.size(), 1u);
  EXPECT_EQ(r.evaluations[0].epsilon, 0.7);
  EXPECT_EQ(r.euclidean_worst_n_w, r.evaluations[0].worst_n_w);
  EXPECT_EQ(r.sample_size, Fixture().size());
  EXPECT_EQ(r.runs, 300);

  // The reference side matches a direct estimate with the same protocol.
  const PrivacyStats direct = EstimateStats(
      Mechanism(Fixture(), Config(1.0)), AllWords(), o.runs, o.seed);
  EXPECT_EQ(r.hyperbolic_worst_n_w, direct.aggregate.max_n_w);
  EXPECT_DOUBLE_EQ(r.hyperbolic_expected_n_w, direct.aggregate.avg_n_w);
}

TEST(CalibrateEuclideanTest, PicksClosestWorstCase) {
  CalibrationOptions o = SmallCalibration(1.0, {0.05, 0.5, 2.0, 8.0, 32.0});
  o.refine_iterations = 0;
  const CalibrationReport r = CalibrateEuclidean(
      Fixture(), Fixture(Geometry::kEuclidean), o);
  ASSERT_EQ(r.evaluations.size(), 5u);
  std::int64_t best_gap = o.runs + 1;
  double best_eps = 0.0;
  for (const CalibrationPoint& p : r.evaluations) {
    const std::int64_t gap = std::abs(p.worst_n_w - r.hyperbolic_worst_n_w);
    if (gap < best_gap) {
      best_gap = gap;
      best_eps = p.epsilon;
    }
  }
  EXPECT_EQ(r.euclidean_epsilon, best_eps);
  EXPECT_DOUBLE_EQ(r.worst_case_gap, static_cast<double>(best_gap) /
                                         r.hyperbolic_worst_n_w);
}

TEST(CalibrateEuclideanTest, RefinementNarrowsGap) {
  const CalibrationOptions coarse_opts = [] {
    CalibrationOptions o = SmallCalibration(1.0, {0.05, 32.0});
    o.refine_iterations = 0;
    return o;
  }();
  CalibrationOptions fine_opts = coarse_opts;
  fine_opts.refine_iterations = 10;
  const auto euc = Fixture(Geometry::kEuclidean);
  const CalibrationReport coarse = CalibrateEuclidean(Fixture(), euc, coarse_opts);
  const CalibrationReport fine = CalibrateEuclidean(Fixture(), euc, fine_opts);
  EXPECT_LE(fine.worst_case_gap, coarse.worst_case_gap);
  EXPECT_GT(fine.evaluations.size(), coarse.evaluations.size());
}

TEST(CalibrateEuclideanTest, MatchedHyperbolicHasLowerExpectedCount) {
  const CalibrationOptions o = SmallCalibration(1.0, {0.125, 0.5, 1, 2, 4, 8, 16});
  const CalibrationReport r = CalibrateEuclidean(
      Fixture(), Fixture(Geometry::kEuclidean), o);
  EXPECT_LT(r.hyperbolic_expected_n_w, r.euclidean_expected_n_w);
}

TEST(CalibrateEuclideanTest, Validation) {
  const Vocabulary& euc = Fixture(Geometry::kEuclidean);
  EXPECT_THROW(CalibrateEuclidean(Fixture(), euc, SmallCalibration(1.0, {})),
               std::invalid_argument);
  EXPECT_THROW(
      CalibrateEuclidean(Fixture(), euc, SmallCalibration(1.0, {-1.0, NAN})),
      std::invalid_argument);
  EXPECT_THROW(CalibrateEuclidean(euc, Fixture(), SmallCalibration(1.0, {1.0})),
               std::invalid_argument);
  TaxonomyOptions other;
  other.geometry = Geometry::kEuclidean;
  other.depth = 2;
  const Vocabulary small = GenerateSyntheticTaxonomy(other).vocabulary;
  EXPECT_THROW(
      CalibrateEuclidean(Fixture(), small, SmallCalibration(1.0, {1.0})),
      std::invalid_argument);
}

TEST(NormalUpperQuantileTest, KnownValues) {
  EXPECT_NEAR(NormalUpperQuantile(0.025), 1.959963985, 1e-8);
  EXPECT_NEAR(NormalUpperQuantile(0.005), 2.575829304, 1e-8);
  EXPECT_NEAR(NormalUpperQuantile(0.5), 0.0, 1e-12);
  for (double p : {1e-6, 1e-3, 0.1, 0.3}) {
    EXPECT_NEAR(0.5 * std::erfc(NormalUpperQuantile(p) / std::sqrt(2.0)), p,
                1e-12 * (1 + p));
  }
}

// The two-proportion slack assumes independent draws. Consecutive states of
// the default chain are strongly correlated, so ratio checks use a chain that
// mixes between released states.
MechanismConfig MixingConfig(double eps) {
  MechanismConfig c = Config(eps);
  c.sampler.proposal_scale = kMixingProposalScale;
  c.sampler.thinning = kMixingThinning;
  return c;
}

TEST(EmpiricalDpRatioTest, IdenticalWordPasses) {
  const Mechanism mech(Fixture(), MixingConfig(1.0));
  const DpRatioReport r =
      EmpiricalDpRatio(mech, Id("root_0_1"), Id("root_0_1"), 20000, 4);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_EQ(r.verdict, DpVerdict::kPass);
  EXPECT_GT(r.supported_outputs, 0u);
}

TEST(EmpiricalDpRatioTest, SiblingsPassAtTwo) {
  const Mechanism mech(Fixture(), MixingConfig(2.0));
  const DpRatioReport r =
      EmpiricalDpRatio(mech, Id("root_0_0"), Id("root_0_1"), 100000, 8);
  EXPECT_EQ(r.verdict, DpVerdict::kPass) << "max=" << r.max_log_ratio
                                         << " bound=" << r.bound;
  EXPECT_NEAR(r.distance,
              PoincareDistance(Fixture().point(Id("root_0_0")),
                               Fixture().point(Id("root_0_1"))),
              1e-15);
}

TEST(EmpiricalDpRatioTest, RowArithmetic) {
  const Mechanism mech(Fixture(), Config(1.0));
  const DpRatioReport r =
      EmpiricalDpRatio(mech, Id("root_1"), Id("root_1_0"), 5000, 2);
  const double n = 5000.0;
  for (const DpRatioRow& row : r.rows) {
    EXPECT_EQ(row.supported, row.count >= 50 && row.other_count >= 50);
    if (!row.supported) continue;
    const double c1 = row.count, c2 = row.other_count;
    EXPECT_DOUBLE_EQ(row.log_ratio, std::log(c1 / c2));
    EXPECT_DOUBLE_EQ(row.slack,
                     r.z * std::sqrt((1 - c1 / n) / c1 + (1 - c2 / n) / c2));
  }
  EXPECT_NEAR(r.z, NormalUpperQuantile(0.01 / (2.0 * r.supported_outputs)),
              1e-12);
}

TEST(EmpiricalDpRatioTest, InsufficientSupportIsNotPass) {
  const Mechanism mech(Fixture(), Config(1e6));
  const DpRatioReport r =
      EmpiricalDpRatio(mech, Id("root_0_0_0"), Id("root_2_2_2"), 1000, 1);
  EXPECT_EQ(r.verdict, DpVerdict::kInsufficientSupport);
  EXPECT_EQ(r.supported_outputs, 0u);
  EXPECT_EQ(DpVerdictName(r.verdict), "INSUFFICIENT_SUPPORT");
}

TEST(EmpiricalDpRatioTest, BoundGrowsWithDistance) {
  const Mechanism mech(Fixture(), Config(1.0));
  const auto near = EmpiricalDpRatio(mech, Id("root_0_0_0"), Id("root_0_0_1"), 10, 1);
  const auto far = EmpiricalDpRatio(mech, Id("root_0_0_0"), Id("root_1_1_1"), 10, 1);
  EXPECT_LT(near.bound, far.bound);
  EXPECT_DOUBLE_EQ(far.bound, far.distance);
}

TEST(DeniabilityWitnessTest, SharedOutputAtModerateEpsilon) {
  // Siblings and their parent all release the parent often at moderate eps.
  const Mechanism mech(Fixture(), Config(1.0));
  const std::vector<WordId> words = {Id("root_0_0"), Id("root_0_0_0"),
                                     Id("root_0_0_1"), Id("root_0_0_2")};
  const PrivacyStats s = EstimateStats(mech, words, 100000, 13);
  const DeniabilityWitness wit =
      FindDeniabilityWitness(s, Id("root_0_0"), Fixture());
  EXPECT_GE(wit.inputs.size(), 2u);
  EXPECT_TRUE(wit.Holds(2)) << "ratio=" << wit.max_ratio
                            << " gamma=" << wit.gamma;
}

TEST(DeniabilityWitnessTest, NoWitnessWhenNoiseless) {
  const Mechanism mech(Fixture(), Config(1e6));
  const PrivacyStats s = EstimateStats(mech, AllWords(), 200, 13);
  EXPECT_FALSE(FindDeniabilityWitness(s, Id("root_1"), Fixture()).Holds());
}

}  // namespace
}  // namespace hyperdp
