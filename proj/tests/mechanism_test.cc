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

#include "hyperdp/mechanism.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hyperdp/embeddings.h"
#include "hyperdp/random.h"

namespace hyperdp {
namespace {

const Vocabulary& Fixture() {
  static const Vocabulary* vocab =
      new Vocabulary(GenerateSyntheticTaxonomy(TaxonomyOptions{}).vocabulary);
  return *vocab;
}

const Vocabulary& EuclideanFixture() {
  static const Vocabulary* vocab = [] {
    TaxonomyOptions opts;
    opts.geometry = Geometry::kEuclidean;
    return new Vocabulary(GenerateSyntheticTaxonomy(opts).vocabulary);
  }();
  return *vocab;
}

MechanismConfig Config(double eps) {
  MechanismConfig c;
  c.epsilon = eps;
  return c;
}

// Output word name -> count over `runs` draws from one noise source.
std::map<std::string, int> Tally(const Mechanism& mech, std::string_view w,
                                 int runs, std::uint64_t seed) {
  NoiseSource noise = mech.NewNoiseSource(seed);
  std::map<std::string, int> out;
  for (int i = 0; i < runs; ++i) ++out[mech.PerturbWord(w, noise)];
  return out;
}

std::vector<std::string> Tokens(std::initializer_list<const char*> words) {
  return {words.begin(), words.end()};
}

TEST(NamesTest, RoundTrip) {
  for (auto n : {NoiseApplication::kAmbientAddition,
                 NoiseApplication::kMobiusTranslation}) {
    EXPECT_EQ(ParseNoiseApplication(NoiseApplicationName(n)), n);
  }
  EXPECT_FALSE(ParseNoiseApplication("additive").has_value());
  EXPECT_EQ(TokenStatusName(TokenStatus::kUnchangedSelfSample),
            "unchanged-self-sample");
}

TEST(StopwordListTest, BundledAndFile) {
  const StopwordList bundled = StopwordList::Bundled();
  EXPECT_TRUE(bundled.Contains("the"));
  EXPECT_FALSE(bundled.Contains("music"));
  EXPECT_EQ(bundled.version(), "en-1");

  const auto path =
      std::filesystem::temp_directory_path() / "hyperdp_stopwords_test.txt";
  std::ofstream(path) << "# comment\nRoot\r\n\nfoo\n";
  const StopwordList custom = StopwordList::FromFile(path.string());
  EXPECT_EQ(custom.size(), 2u);
  EXPECT_TRUE(custom.Contains("root"));
  std::filesystem::remove(path);
  EXPECT_THROW(StopwordList::FromFile("/nonexistent/stop.txt"),
               std::runtime_error);
}

TEST(SelectionPolicyTest, Parse) {
  EXPECT_EQ(SelectionPolicy::Parse("all").kind, SelectionPolicy::Kind::kAll);
  EXPECT_EQ(SelectionPolicy::Parse("nonstop").kind,
            SelectionPolicy::Kind::kNonStopwords);
  const SelectionPolicy p = SelectionPolicy::Parse("slots:4,0,2");
  EXPECT_EQ(p.slots, (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_EQ(p.ToString(), "slots:0,2,4");
  EXPECT_THROW(SelectionPolicy::Parse("slots:"), std::invalid_argument);
  EXPECT_THROW(SelectionPolicy::Parse("slots:1,x"), std::invalid_argument);
  EXPECT_THROW(SelectionPolicy::Parse("some"), std::invalid_argument);
}

TEST(TokenizeTest, SplitsPunctuationAndKeepsSpacing) {
  const TokenParts parts = SplitTokenPunctuation("(\"root_0\"),");
  EXPECT_EQ(parts.prefix, "(\"");
  EXPECT_EQ(parts.core, "root_0");
  EXPECT_EQ(parts.suffix, "\"),");
  EXPECT_EQ(SplitTokenPunctuation("...").core, "");

  const TokenizedLine tl = TokenizeLine("  a\tbb  c ");
  EXPECT_EQ(tl.tokens, Tokens({"a", "bb", "c"}));
  ASSERT_EQ(tl.separators.size(), 4u);
  EXPECT_EQ(tl.separators[0], "  ");
  EXPECT_EQ(tl.separators[3], " ");
  EXPECT_TRUE(TokenizeLine("").tokens.empty());
}

TEST(MechanismTest, ValidatesConfig) {
  EXPECT_THROW(Mechanism(Fixture(), Config(0.0)), std::invalid_argument);
  EXPECT_THROW(Mechanism(Fixture(), Config(INFINITY)), std::invalid_argument);
  MechanismConfig c = Config(1.0);
  c.ball_margin = 1.0;
  EXPECT_THROW(Mechanism(Fixture(), c), std::invalid_argument);
  const Mechanism mech(Fixture(), Config(1.0));
  NoiseSource noise = mech.NewNoiseSource(1);
  EXPECT_THROW(mech.PerturbWord("nonexistent", noise), std::invalid_argument);
  EXPECT_THROW(mech.PerturbWord(WordId{Fixture().size()}, noise),
               std::out_of_range);
}

TEST(PerturbWordTest, HugeEpsilonReturnsSelf) {
  for (const Vocabulary* vocab : {&Fixture(), &EuclideanFixture()}) {
    const Mechanism mech(*vocab, Config(1e6));
    for (const char* w : {"root", "root_1", "root_2_0_1"}) {
      const auto tally = Tally(mech, w, 200, 17);
      EXPECT_GT(tally.count(w) ? tally.at(w) : 0, 0.99 * 200) << w;
    }
  }
}

TEST(PerturbWordTest, SmallEpsilonGivesMoreDistinctOutputs) {
  const Mechanism loose(Fixture(), Config(0.125));
  const Mechanism tight(Fixture(), Config(8.0));
  for (const char* w : {"root", "root_0_1", "root_2_2_2"}) {
    EXPECT_GT(Tally(loose, w, 1000, 3).size(), Tally(tight, w, 1000, 3).size())
        << w;
  }
}

TEST(PerturbWordTest, LeafMovesWithinItsBranch) {
  // Ancestors and siblings of a leaf are released far more often than leaves
  // of an unrelated top-level branch.
  const Mechanism mech(Fixture(), Config(2.0));
  const std::set<std::string> related = {"root_0_0", "root_0", "root",
                                         "root_0_0_1", "root_0_0_2"};
  const auto tally = Tally(mech, "root_0_0_0", 1000, 5);
  int near = 0, far = 0;
  for (const auto& [word, count] : tally) {
    if (related.contains(word)) near += count;
    if (word.starts_with("root_1_") && word.size() == 10) far += count;
  }
  EXPECT_GT(near, 2 * far) << "near=" << near << " far=" << far;
  EXPECT_GT(near, 0);
}

TEST(PerturbWordTest, MobiusModeStaysInVocabularyAndNearSelf) {
  MechanismConfig c = Config(1e6);
  c.noise = NoiseApplication::kMobiusTranslation;
  const Mechanism mech(Fixture(), c);
  EXPECT_EQ(Tally(mech, "root_1_2_0", 100, 2).at("root_1_2_0"), 100);
  c.epsilon = 1.0;
  const Mechanism noisy(Fixture(), c);
  NoiseSource noise = noisy.NewNoiseSource(4);
  for (int i = 0; i < 200; ++i) {
    EXPECT_TRUE(Fixture().Find(noisy.PerturbWord("root_2", noise)).has_value());
  }
  EXPECT_EQ(noise.clamp_count(), 0);
}

TEST(PerturbWordTest, DeterministicPerSeed) {
  const Mechanism mech(Fixture(), Config(1.0));
  EXPECT_EQ(Tally(mech, "root_1", 300, 8), Tally(mech, "root_1", 300, 8));
  EXPECT_NE(Tally(mech, "root_1", 300, 8), Tally(mech, "root_1", 300, 9));
}

TEST(RedactTokensTest, AllStopwordsUnchanged) {
  const Mechanism mech(Fixture(), Config(0.1));
  const auto tokens = Tokens({"The", "of", "and", "a", "is"});
  const RedactionResult r = mech.RedactTokens(tokens, 1);
  EXPECT_EQ(r.released_tokens, tokens);
  for (TokenStatus s : r.status) EXPECT_EQ(s, TokenStatus::kUnchangedByPolicy);
}

TEST(RedactTokensTest, SlotPolicyTouchesOnlyListedPosition) {
  MechanismConfig c = Config(0.05);
  c.policy = SelectionPolicy::Parse("slots:4");
  const Mechanism mech(Fixture(), c);
  const auto tokens = Tokens({"root", "root_0", "root_1", "root_2", "root_0_1"});
  int changed_anywhere = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RedactionResult r = mech.RedactTokens(tokens, seed);
    ASSERT_EQ(r.released_tokens.size(), 5u);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(r.released_tokens[i], tokens[i]);
      EXPECT_EQ(r.status[i], TokenStatus::kUnchangedByPolicy);
    }
    EXPECT_NE(r.status[4], TokenStatus::kUnchangedByPolicy);
    changed_anywhere += r.status[4] == TokenStatus::kPerturbed;
  }
  EXPECT_GT(changed_anywhere, 0);
}

TEST(RedactTokensTest, LabelsEveryToken) {
  MechanismConfig c = Config(0.05);
  c.policy = SelectionPolicy::Parse("all");
  const Mechanism mech(Fixture(), c);
  const auto tokens = Tokens({"ROOT_0,", "unknown", "!!", "the"});
  const RedactionResult r = mech.RedactTokens(tokens, 12);
  ASSERT_EQ(r.status.size(), 4u);
  EXPECT_EQ(r.original_tokens, tokens);
  EXPECT_NE(r.status[0], TokenStatus::kUnchangedByPolicy);
  if (r.status[0] == TokenStatus::kPerturbed) {
    EXPECT_TRUE(r.released_tokens[0].ends_with(","));
    EXPECT_TRUE(Fixture()
                    .Find(std::string_view(r.released_tokens[0]).substr(
                        0, r.released_tokens[0].size() - 1))
                    .has_value());
  } else {
    EXPECT_EQ(r.released_tokens[0], "ROOT_0,");
  }
  EXPECT_EQ(r.status[1], TokenStatus::kUnchangedUnknownWord);
  EXPECT_EQ(r.status[2], TokenStatus::kUnchangedUnknownWord);
  EXPECT_EQ(r.status[3], TokenStatus::kUnchangedUnknownWord);
  EXPECT_EQ(r.released_tokens[1], "unknown");
}

TEST(RedactTokensTest, PreservesCountAndAlignment) {
  const Mechanism mech(Fixture(), Config(0.5));
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 1 + rng.Below(12);
    for (std::size_t i = 0; i < len; ++i) {
      tokens.push_back(rng.Below(3) == 0
                           ? std::string("the")
                           : Fixture().word(WordId{rng.Below(Fixture().size())}));
    }
    const RedactionResult r = mech.RedactTokens(tokens, trial);
    ASSERT_EQ(r.released_tokens.size(), len);
    ASSERT_EQ(r.status.size(), len);
    for (std::size_t i = 0; i < len; ++i) {
      if (r.status[i] != TokenStatus::kPerturbed) {
        EXPECT_EQ(r.released_tokens[i], tokens[i]);
      } else {
        EXPECT_NE(r.released_tokens[i], tokens[i]);
      }
    }
  }
}

TEST(RedactTokensTest, Deterministic) {
  const Mechanism mech(Fixture(), Config(0.3));
  const auto tokens = Tokens({"root_0", "the", "root_1_1", "root_2_0_0"});
  const RedactionResult a = mech.RedactTokens(tokens, 99);
  const RedactionResult b = mech.RedactTokens(tokens, 99);
  EXPECT_EQ(a.released_tokens, b.released_tokens);
  EXPECT_EQ(a.status, b.status);
}

TEST(RedactLineTest, KeepsWhitespaceLayout) {
  const Mechanism mech(Fixture(), Config(1e6));
  EXPECT_EQ(mech.RedactLine("  the root_0\t root_1 ", 3),
            "  the root_0\t root_1 ");
  EXPECT_EQ(mech.RedactLine("", 3), "");

  const Mechanism noisy(Fixture(), Config(0.1));
  RedactionResult detail;
  const std::string out = noisy.RedactLine("a  root_0 root_1", 4, &detail);
  ASSERT_EQ(detail.released_tokens.size(), 3u);
  EXPECT_EQ(out, "a  " + detail.released_tokens[1] + " " +
                     detail.released_tokens[2]);
}

}  // namespace
}  // namespace hyperdp
