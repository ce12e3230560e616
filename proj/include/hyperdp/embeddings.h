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

// Word vocabularies with embedding rows, the text embedding format, exact
// nearest-word discretization, and a synthetic taxonomy generator.
//
// Text format (UTF-8):
//
//   [<count> <dim>]                 optional header
//   <word> <v1> <v2> ... <vdim>     one row per word
//
// Fields are separated by spaces; numbers use '.' as the decimal separator.
// A first line of exactly two unsigned integers is taken as the header.

#ifndef HYPERDP_EMBEDDINGS_H_
#define HYPERDP_EMBEDDINGS_H_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyperdp/geometry.h"
#include "hyperdp/random.h"

namespace hyperdp {

enum class Geometry { kHyperbolic, kEuclidean };

inline std::string_view GeometryName(Geometry g) {
  return g == Geometry::kHyperbolic ? "hyperbolic" : "euclidean";
}

inline std::optional<Geometry> ParseGeometry(std::string_view s) {
  if (s == "hyperbolic") return Geometry::kHyperbolic;
  if (s == "euclidean") return Geometry::kEuclidean;
  return std::nullopt;
}

struct WordId {
  std::size_t index = 0;
  friend auto operator<=>(const WordId&, const WordId&) = default;
};

// Norm tolerance of the hierarchy relation.
inline constexpr double kHierarchyTolerance = 1e-9;

class Vocabulary {
 public:
  Vocabulary() = default;

  // `matrix` is row-major, words.size() x dim.
  Vocabulary(std::vector<std::string> words, std::vector<double> matrix,
             std::size_t dim, Geometry geometry)
      : words_(std::move(words)),
        matrix_(std::move(matrix)),
        dim_(dim),
        geometry_(geometry) {
    if (words_.empty()) {
      throw std::invalid_argument("Vocabulary: no words");
    }
    if (dim_ == 0) throw std::invalid_argument("Vocabulary: dim must be > 0");
    if (matrix_.size() != words_.size() * dim_) {
      throw std::invalid_argument("Vocabulary: matrix size mismatch");
    }
    internal::RequireFinite(matrix_, "Vocabulary");
    squared_norms_.reserve(words_.size());
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i].empty()) {
        throw std::invalid_argument("Vocabulary: empty word at row " +
                                    std::to_string(i));
      }
      if (!index_.emplace(words_[i], i).second) {
        throw std::invalid_argument("Vocabulary: duplicate word '" +
                                    words_[i] + "'");
      }
      const double sq = internal::SquaredNorm(row(WordId{i}));
      if (geometry_ == Geometry::kHyperbolic && !(sq < 1.0)) {
        throw std::invalid_argument("Vocabulary: row '" + words_[i] +
                                    "' lies outside the unit ball");
      }
      squared_norms_.push_back(sq);
    }
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::size_t dim() const { return dim_; }
  Geometry geometry() const { return geometry_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(WordId id) const { return words_.at(id.index); }

  std::span<const double> row(WordId id) const {
    return std::span<const double>(matrix_).subspan(id.index * dim_, dim_);
  }
  double squared_norm(WordId id) const { return squared_norms_.at(id.index); }
  double norm(WordId id) const { return std::sqrt(squared_norm(id)); }

  // Point of a hyperbolic row.
  PoincareVec point(WordId id) const {
    return PoincareVec(std::vector<double>(row(id).begin(), row(id).end()));
  }

  std::optional<WordId> Find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return WordId{it->second};
  }

  WordId Require(std::string_view word) const {
    auto id = Find(word);
    if (!id) {
      throw std::invalid_argument("word not in vocabulary: '" +
                                  std::string(word) + "'");
    }
    return *id;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.geometry_ == b.geometry_ && a.dim_ == b.dim_ &&
           a.words_ == b.words_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> matrix_;
  std::size_t dim_ = 0;
  Geometry geometry_ = Geometry::kHyperbolic;
  std::vector<double> squared_norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

class EmbeddingFormatError : public std::runtime_error {
 public:
  EmbeddingFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadOptions {
  Geometry geometry = Geometry::kHyperbolic;
  // Retract hyperbolic rows with norm >= 1 into the ball instead of failing.
  bool clamp = false;
  double ball_margin = kDefaultBallMargin;
};

struct LoadResult {
  Vocabulary vocabulary;
  // Rows retracted into the ball (only with LoadOptions::clamp).
  std::int64_t clamped_rows = 0;
};

namespace internal {

inline std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> ParseDouble(std::string_view s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> ParseUnsigned(std::string_view s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace internal

inline LoadResult ParseEmbeddings(std::istream& in, const LoadOptions& opts) {
  std::vector<std::string> words;
  std::vector<double> matrix;
  std::unordered_map<std::string, std::size_t> seen;
  std::optional<std::uint64_t> declared_count;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;
  std::int64_t clamped = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = internal::SplitFields(line);
    if (fields.empty()) continue;
    if (first_content_line) {
      first_content_line = false;
      if (fields.size() == 2) {
        auto count = internal::ParseUnsigned(fields[0]);
        auto declared_dim = internal::ParseUnsigned(fields[1]);
        if (count && declared_dim) {
          if (*declared_dim == 0) {
            throw EmbeddingFormatError(line_no, "header declares dimension 0");
          }
          declared_count = *count;
          dim = static_cast<std::size_t>(*declared_dim);
          continue;
        }
      }
    }
    if (fields.size() < 2) {
      throw EmbeddingFormatError(line_no, "expected a word and coordinates");
    }
    const std::size_t row_dim = fields.size() - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw EmbeddingFormatError(
          line_no, "dimension mismatch: expected " + std::to_string(dim) +
                       " coordinates, found " + std::to_string(row_dim));
    }
    std::string word(fields[0]);
    if (!seen.emplace(word, words.size()).second) {
      throw EmbeddingFormatError(line_no, "duplicate word '" + word + "'");
    }
    std::vector<double> row;
    row.reserve(dim);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto v = internal::ParseDouble(fields[k]);
      if (!v) {
        throw EmbeddingFormatError(
            line_no, "unparsable number '" + std::string(fields[k]) + "'");
      }
      row.push_back(*v);
    }
    if (opts.geometry == Geometry::kHyperbolic &&
        !(internal::SquaredNorm(row) < 1.0)) {
      if (!opts.clamp) {
        throw EmbeddingFormatError(
            line_no, "row '" + word + "' has norm >= 1 (use clamping to retract)");
      }
      const PoincareVec p = ProjectIntoBall(EuclideanVec(row), opts.ball_margin);
      row.assign(p.coords().begin(), p.coords().end());
      ++clamped;
    }
    words.push_back(std::move(word));
    matrix.insert(matrix.end(), row.begin(), row.end());
  }
  if (words.empty()) {
    throw EmbeddingFormatError(line_no, "no embedding rows");
  }
  if (declared_count && *declared_count != words.size()) {
    throw EmbeddingFormatError(
        line_no, "header declares " + std::to_string(*declared_count) +
                     " rows, found " + std::to_string(words.size()));
  }
  return LoadResult{
      Vocabulary(std::move(words), std::move(matrix), dim, opts.geometry),
      clamped};
}

inline LoadResult LoadEmbeddings(const std::string& path,
                                 const LoadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  return ParseEmbeddings(in, opts);
}

inline Vocabulary LoadEmbeddings(const std::string& path, Geometry geometry,
                                 bool clamp) {
  LoadOptions opts;
  opts.geometry = geometry;
  opts.clamp = clamp;
  return LoadEmbeddings(path, opts).vocabulary;
}

namespace internal {

inline void AppendShortest(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace internal

// Writes the header and one row per word with shortest round-trip numbers.
inline void SaveEmbeddings(const Vocabulary& vocab, std::ostream& out) {
  std::string buf;
  buf += std::to_string(vocab.size());
  buf += ' ';
  buf += std::to_string(vocab.dim());
  buf += '\n';
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    buf += vocab.word(WordId{i});
    for (double v : vocab.row(WordId{i})) {
      buf += ' ';
      internal::AppendShortest(buf, v);
    }
    buf += '\n';
  }
  out << buf;
}

inline void SaveEmbeddings(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file: " + path);
  SaveEmbeddings(vocab, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Exact linear scan for the row closest to `query` in the vocabulary's own
// metric. Hyperbolic rows are ranked by the arcosh argument, which is
// monotone in the distance. Ties go to the lowest index.
inline WordId NearestWord(std::span<const double> query,
                          const Vocabulary& vocab) {
  if (vocab.empty()) throw std::invalid_argument("NearestWord: empty vocabulary");
  internal::RequireSameDim(query.size(), vocab.dim(), "NearestWord");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  if (vocab.geometry() == Geometry::kHyperbolic) {
    const double q_sq = internal::SquaredNorm(query);
    if (!(q_sq < 1.0)) {
      throw std::invalid_argument("NearestWord: query outside the unit ball");
    }
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const WordId id{i};
      const double score = internal::PoincareDelta(query, q_sq, vocab.row(id),
                                                   vocab.squared_norm(id));
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
  } else {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const double score = internal::SquaredDistance(query, vocab.row(WordId{i}));
      if (score < best_score) {
        best_score = score;
        best = i;
      }
    }
  }
  return WordId{best};
}

inline WordId NearestWord(const PoincareVec& query, const Vocabulary& vocab) {
  return NearestWord(query.coords(), vocab);
}

inline WordId NearestWord(const EuclideanVec& query, const Vocabulary& vocab) {
  return NearestWord(query.coords(), vocab);
}

// w precedes w_hat in the embedding hierarchy: general concepts sit closer to
// the origin, so w is below w_hat when its norm is strictly larger.
inline bool IsBelow(WordId w, WordId w_hat, const Vocabulary& vocab,
                    double tolerance = kHierarchyTolerance) {
  if (vocab.geometry() != Geometry::kHyperbolic) {
    throw std::invalid_argument("IsBelow: requires a hyperbolic vocabulary");
  }
  return vocab.norm(w) > vocab.norm(w_hat) + tolerance;
}

struct TaxonomyOptions {
  int depth = 3;
  int branching = 3;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  // kHyperbolic places level k at hyperbolic radius k * level_spacing;
  // kEuclidean places it at Euclidean radius k / (depth + 1).
  Geometry geometry = Geometry::kHyperbolic;
  double level_spacing = 1.0;
  // Angular jitter as a fraction of a node's angular wedge.
  double jitter = 0.05;
};

struct SyntheticTaxonomy {
  Vocabulary vocabulary;
  // Parent row index, -1 for the root.
  std::vector<std::ptrdiff_t> parent;
  std::vector<int> depth;
};

// Balanced tree laid out in the plane of the first two coordinates. The root
// sits at the origin; each node owns an angular wedge that is split evenly
// among its children, and the norm grows strictly with depth. Rows are in
// breadth-first order; names encode the path ("root", "root_0", "root_0_2").
inline SyntheticTaxonomy GenerateSyntheticTaxonomy(const TaxonomyOptions& opts) {
  if (opts.depth < 1) throw std::invalid_argument("taxonomy: depth must be >= 1");
  if (opts.branching < 1) {
    throw std::invalid_argument("taxonomy: branching must be >= 1");
  }
  if (opts.dim < 2) throw std::invalid_argument("taxonomy: dim must be >= 2");
  if (!(opts.level_spacing > 0.0) || !std::isfinite(opts.level_spacing)) {
    throw std::invalid_argument("taxonomy: level_spacing must be > 0");
  }
  if (!(opts.jitter >= 0.0 && opts.jitter < 0.5)) {
    throw std::invalid_argument("taxonomy: jitter must be in [0, 0.5)");
  }
  double total = 1.0, level = 1.0;
  for (int d = 1; d <= opts.depth; ++d) {
    level *= opts.branching;
    total += level;
  }
  if (total > 1e7) throw std::invalid_argument("taxonomy: too many nodes");

  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Rng rng(opts.seed);
  SyntheticTaxonomy out;
  std::vector<std::string> words{"root"};
  std::vector<double> matrix(opts.dim, 0.0);
  out.parent.push_back(-1);
  out.depth.push_back(0);

  struct Wedge {
    std::size_t node;
    double center;
    double width;
  };
  std::vector<Wedge> frontier{{0, 0.0, kTwoPi}};
  std::vector<double> dir(opts.dim);
  for (int d = 1; d <= opts.depth; ++d) {
    const double radius =
        opts.geometry == Geometry::kHyperbolic
            ? std::tanh(0.5 * d * opts.level_spacing)
            : static_cast<double>(d) / static_cast<double>(opts.depth + 1);
    std::vector<Wedge> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(opts.branching));
    for (const Wedge& w : frontier) {
      const double sub = w.width / opts.branching;
      for (int j = 0; j < opts.branching; ++j) {
        const double angle = w.center - 0.5 * w.width + sub * (j + 0.5);
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[0] = std::cos(angle);
        dir[1] = std::sin(angle);
        for (double& v : dir) v += opts.jitter * sub * rng.Normal();
        const double scale = radius / std::sqrt(internal::SquaredNorm(dir));
        for (double v : dir) matrix.push_back(v * scale);
        words.push_back(words[w.node] + "_" + std::to_string(j));
        out.parent.push_back(static_cast<std::ptrdiff_t>(w.node));
        out.depth.push_back(d);
        next.push_back({words.size() - 1, angle, sub});
      }
    }
    frontier = std::move(next);
  }
  out.vocabulary =
      Vocabulary(std::move(words), std::move(matrix), opts.dim, opts.geometry);
  return out;
}

}  // namespace hyperdp

#endif  // HYPERDP_EMBEDDINGS_H_
