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

// Word-level metric-DP text mechanism.
//
// Each selected word w is released as
//
//   w_hat = argmin_u d(phi(u), proj(phi(w) + z))
//
// where z is a noise draw for the vocabulary's geometry: a state of the
// hyperbolic MH chain for hyperbolic vocabularies (followed by retraction
// into the ball), or a multivariate Laplace draw for Euclidean ones.
//
// A NoiseSource owns the random state for one redaction call. For hyperbolic
// noise it holds one chain and releases successive post-burn-in states as
// draws, so separate calls never share state.

#ifndef HYPERDP_MECHANISM_H_
#define HYPERDP_MECHANISM_H_

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "hyperdp/embeddings.h"
#include "hyperdp/geometry.h"
#include "hyperdp/random.h"
#include "hyperdp/sampler.h"

namespace hyperdp {

enum class NoiseApplication {
  // phi(w) + z in ambient coordinates, then retraction into the ball.
  kAmbientAddition,
  // Mobius translation phi(w) (+) z of the origin-centred draw.
  kMobiusTranslation,
};

inline std::string_view NoiseApplicationName(NoiseApplication n) {
  return n == NoiseApplication::kAmbientAddition ? "ambient" : "mobius";
}

inline std::optional<NoiseApplication> ParseNoiseApplication(std::string_view s) {
  if (s == "ambient") return NoiseApplication::kAmbientAddition;
  if (s == "mobius") return NoiseApplication::kMobiusTranslation;
  return std::nullopt;
}

enum class TokenStatus {
  kPerturbed,
  kUnchangedByPolicy,
  kUnchangedUnknownWord,
  kUnchangedSelfSample,
};

inline std::string_view TokenStatusName(TokenStatus s) {
  switch (s) {
    case TokenStatus::kPerturbed:
      return "perturbed";
    case TokenStatus::kUnchangedByPolicy:
      return "unchanged-by-policy";
    case TokenStatus::kUnchangedUnknownWord:
      return "unchanged-unknown-word";
    case TokenStatus::kUnchangedSelfSample:
      return "unchanged-self-sample";
  }
  return "?";
}

class StopwordList {
 public:
  static constexpr std::string_view kBundledVersion = "en-1";

  // Bundled English list (the common NLTK-style set of function words).
  static StopwordList Bundled() {
    static constexpr std::string_view kWords[] = {
        "a",       "about",   "above",   "after",   "again",   "against",
        "ain",     "all",     "am",      "an",      "and",     "any",
        "are",     "aren",    "as",      "at",      "be",      "because",
        "been",    "before",  "being",   "below",   "between", "both",
        "but",     "by",      "can",     "couldn",  "d",       "did",
        "didn",    "do",      "does",    "doesn",   "doing",   "don",
        "down",    "during",  "each",    "few",     "for",     "from",
        "further", "had",     "hadn",    "has",     "hasn",    "have",
        "haven",   "having",  "he",      "her",     "here",    "hers",
        "herself", "him",     "himself", "his",     "how",     "i",
        "if",      "in",      "into",    "is",      "isn",     "it",
        "its",     "itself",  "just",    "ll",      "m",       "ma",
        "me",      "mightn",  "more",    "most",    "mustn",   "my",
        "myself",  "needn",   "no",      "nor",     "not",     "now",
        "o",       "of",      "off",     "on",      "once",    "only",
        "or",      "other",   "our",     "ours",    "ourselves", "out",
        "over",    "own",     "re",      "s",       "same",    "shan",
        "she",     "should",  "shouldn", "so",      "some",    "such",
        "t",       "than",    "that",    "the",     "their",   "theirs",
        "them",    "themselves", "then", "there",   "these",   "they",
        "this",    "those",   "through", "to",      "too",     "under",
        "until",   "up",      "ve",      "very",    "was",     "wasn",
        "we",      "were",    "weren",   "what",    "when",    "where",
        "which",   "while",   "who",     "whom",    "why",     "will",
        "with",    "won",     "wouldn",  "y",       "you",     "your",
        "yours",   "yourself", "yourselves",
    };
    StopwordList list;
    list.version_ = std::string(kBundledVersion);
    for (std::string_view w : kWords) list.words_.emplace(w);
    return list;
  }

  // One word per line; blank lines and lines starting with '#' are skipped.
  static StopwordList FromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stopword file: " + path);
    StopwordList list;
    list.version_ = "file:" + path;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      for (char& c : line) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      list.words_.insert(line);
    }
    return list;
  }

  bool Contains(std::string_view lowercase_word) const {
    return words_.contains(std::string(lowercase_word));
  }
  std::size_t size() const { return words_.size(); }
  const std::string& version() const { return version_; }

 private:
  std::unordered_set<std::string> words_;
  std::string version_;
};

struct SelectionPolicy {
  enum class Kind { kAll, kNonStopwords, kSlots };

  Kind kind = Kind::kNonStopwords;
  // Zero-based token positions for kSlots.
  std::vector<std::size_t> slots;

  // "all", "nonstop", or "slots:<i>,<j>,...".
  static SelectionPolicy Parse(std::string_view spec) {
    SelectionPolicy p;
    if (spec == "all") {
      p.kind = Kind::kAll;
    } else if (spec == "nonstop") {
      p.kind = Kind::kNonStopwords;
    } else if (spec.starts_with("slots:")) {
      p.kind = Kind::kSlots;
      std::string_view rest = spec.substr(6);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        auto v = internal::ParseUnsigned(item);
        if (!v) {
          throw std::invalid_argument("bad slot index '" + std::string(item) +
                                      "'");
        }
        p.slots.push_back(static_cast<std::size_t>(*v));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      if (p.slots.empty()) throw std::invalid_argument("empty slot list");
      std::sort(p.slots.begin(), p.slots.end());
    } else {
      throw std::invalid_argument("unknown policy '" + std::string(spec) + "'");
    }
    return p;
  }

  std::string ToString() const {
    switch (kind) {
      case Kind::kAll:
        return "all";
      case Kind::kNonStopwords:
        return "nonstop";
      case Kind::kSlots: {
        std::string s = "slots:";
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (i) s += ',';
          s += std::to_string(slots[i]);
        }
        return s;
      }
    }
    return "?";
  }
};

struct MechanismConfig {
  double epsilon = 1.0;
  // Chain settings for hyperbolic noise. dim, epsilon and seed are taken from
  // the vocabulary, `epsilon` above and the per-call seed respectively.
  SamplerConfig sampler;
  SelectionPolicy policy;
  StopwordList stopwords = StopwordList::Bundled();
  NoiseApplication noise = NoiseApplication::kAmbientAddition;
  double ball_margin = kDefaultBallMargin;
};

struct RedactionResult {
  std::vector<std::string> original_tokens;
  std::vector<std::string> released_tokens;
  std::vector<TokenStatus> status;
};

// A whitespace-separated token split into leading punctuation, the lookup
// core, and trailing punctuation.
struct TokenParts {
  std::string_view prefix;
  std::string_view core;
  std::string_view suffix;
};

inline TokenParts SplitTokenPunctuation(std::string_view token) {
  auto is_punct = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  };
  std::size_t b = 0, e = token.size();
  while (b < e && is_punct(token[b])) ++b;
  while (e > b && is_punct(token[e - 1])) --e;
  return {token.substr(0, b), token.substr(b, e - b), token.substr(e)};
}

inline std::string LowercaseAscii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Alternating runs of whitespace and tokens, so a line can be rebuilt with
// its original spacing.
struct TokenizedLine {
  std::vector<std::string> tokens;
  // separators[i] precedes tokens[i]; separators.back() trails the line.
  std::vector<std::string> separators;
};

inline TokenizedLine TokenizeLine(std::string_view line) {
  auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  TokenizedLine out;
  std::size_t i = 0;
  while (true) {
    std::size_t j = i;
    while (j < line.size() && is_space(line[j])) ++j;
    out.separators.emplace_back(line.substr(i, j - i));
    if (j >= line.size()) break;
    std::size_t k = j;
    while (k < line.size() && !is_space(line[k])) ++k;
    out.tokens.emplace_back(line.substr(j, k - j));
    i = k;
  }
  return out;
}

class Mechanism;

class NoiseSource {
 public:
  // Writes one noise vector of the vocabulary's dimension into `out`.
  void Draw(std::span<double> out) {
    if (chain_) {
      chain_->NextInto(out);
    } else {
      SampleEuclideanLaplaceInto(epsilon_, rng_, out);
    }
  }

  // Chain statistics; zero for Euclidean noise.
  double acceptance_rate() const {
    return chain_ ? chain_->acceptance_rate() : 0.0;
  }
  std::int64_t clamp_count() const { return clamps_; }

 private:
  friend class Mechanism;
  NoiseSource(std::optional<MhChain> chain, double epsilon, std::uint64_t seed)
      : chain_(std::move(chain)), epsilon_(epsilon), rng_(seed) {}

  std::optional<MhChain> chain_;
  double epsilon_;
  Rng rng_;
  // Perturbed points retracted into the ball.
  std::int64_t clamps_ = 0;
};

class Mechanism {
 public:
  // `vocab` must outlive the mechanism.
  Mechanism(const Vocabulary& vocab, MechanismConfig config)
      : vocab_(&vocab), config_(std::move(config)) {
    if (vocab.empty()) throw std::invalid_argument("Mechanism: empty vocabulary");
    internal::RequirePositiveEpsilon(config_.epsilon, "Mechanism");
    if (!(config_.ball_margin > 0.0 && config_.ball_margin < 1.0)) {
      throw std::invalid_argument("Mechanism: ball_margin must be in (0, 1)");
    }
    config_.sampler.dim = vocab.dim();
    config_.sampler.epsilon = config_.epsilon;
    config_.sampler.ball_margin = config_.ball_margin;
    config_.sampler.Validate();
  }

  const Vocabulary& vocabulary() const { return *vocab_; }
  const MechanismConfig& config() const { return config_; }
  double epsilon() const { return config_.epsilon; }

  NoiseSource NewNoiseSource(std::uint64_t seed) const {
    if (vocab_->geometry() == Geometry::kHyperbolic) {
      return NoiseSource(MhChain(config_.sampler, seed), config_.epsilon, seed);
    }
    return NoiseSource(std::nullopt, config_.epsilon, seed);
  }

  WordId PerturbWord(WordId w, NoiseSource& noise) const {
    const Vocabulary& vocab = *vocab_;
    if (w.index >= vocab.size()) {
      throw std::out_of_range("PerturbWord: word id out of range");
    }
    const std::size_t n = vocab.dim();
    std::vector<double> z(n);
    noise.Draw(z);
    const auto phi = vocab.row(w);
    std::vector<double> moved(n);
    if (vocab.geometry() == Geometry::kEuclidean) {
      for (std::size_t i = 0; i < n; ++i) moved[i] = phi[i] + z[i];
      return NearestWord(moved, vocab);
    }
    if (config_.noise == NoiseApplication::kMobiusTranslation) {
      const EuclideanVec t = MobiusAdd(vocab.point(w), PoincareVec(z));
      std::copy(t.coords().begin(), t.coords().end(), moved.begin());
    } else {
      for (std::size_t i = 0; i < n; ++i) moved[i] = phi[i] + z[i];
    }
    if (!(internal::SquaredNorm(moved) < 1.0)) {
      const PoincareVec p =
          ProjectIntoBall(EuclideanVec(moved), config_.ball_margin);
      std::copy(p.coords().begin(), p.coords().end(), moved.begin());
      ++noise.clamps_;
    }
    return NearestWord(moved, vocab);
  }

  const std::string& PerturbWord(std::string_view w, NoiseSource& noise) const {
    return vocab_->word(PerturbWord(vocab_->Require(w), noise));
  }

  bool Selects(std::size_t position, std::string_view lowercase_core) const {
    switch (config_.policy.kind) {
      case SelectionPolicy::Kind::kAll:
        return true;
      case SelectionPolicy::Kind::kNonStopwords:
        return !config_.stopwords.Contains(lowercase_core);
      case SelectionPolicy::Kind::kSlots:
        return std::binary_search(config_.policy.slots.begin(),
                                  config_.policy.slots.end(), position);
    }
    return false;
  }

  // Releases every selected, known token through PerturbWord; everything else
  // is copied. Vocabulary lookup is case-folded with edge punctuation
  // removed, and the punctuation is re-attached to the released word.
  RedactionResult RedactTokens(std::span<const std::string> tokens,
                               std::uint64_t seed) const {
    RedactionResult out;
    out.original_tokens.assign(tokens.begin(), tokens.end());
    out.released_tokens.reserve(tokens.size());
    out.status.reserve(tokens.size());
    std::optional<NoiseSource> noise;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const TokenParts parts = SplitTokenPunctuation(tokens[i]);
      const std::string key = LowercaseAscii(parts.core);
      if (!Selects(i, key)) {
        out.released_tokens.push_back(tokens[i]);
        out.status.push_back(TokenStatus::kUnchangedByPolicy);
        continue;
      }
      const auto id = key.empty() ? std::nullopt : vocab_->Find(key);
      if (!id) {
        out.released_tokens.push_back(tokens[i]);
        out.status.push_back(TokenStatus::kUnchangedUnknownWord);
        continue;
      }
      if (!noise) noise.emplace(NewNoiseSource(seed));
      const WordId released = PerturbWord(*id, *noise);
      if (released == *id) {
        out.released_tokens.push_back(tokens[i]);
        out.status.push_back(TokenStatus::kUnchangedSelfSample);
      } else {
        std::string t(parts.prefix);
        t += vocab_->word(released);
        t += parts.suffix;
        out.released_tokens.push_back(std::move(t));
        out.status.push_back(TokenStatus::kPerturbed);
      }
    }
    return out;
  }

  // Redacts one line, preserving its whitespace layout.
  std::string RedactLine(std::string_view line, std::uint64_t seed,
                         RedactionResult* detail = nullptr) const {
    const TokenizedLine tl = TokenizeLine(line);
    RedactionResult r = RedactTokens(tl.tokens, seed);
    std::string out;
    for (std::size_t i = 0; i < r.released_tokens.size(); ++i) {
      out += tl.separators[i];
      out += r.released_tokens[i];
    }
    out += tl.separators.back();
    if (detail != nullptr) *detail = std::move(r);
    return out;
  }

 private:
  const Vocabulary* vocab_;
  MechanismConfig config_;
};

}  // namespace hyperdp

#endif  // HYPERDP_MECHANISM_H_
