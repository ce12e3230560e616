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

// TSV and JSON serialization of samples, statistics and verification
// reports. Output carries no timestamps or host data so identical inputs give
// identical bytes. TSV files start with "# key<TAB>value" metadata lines.
//
// Depends on nlohmann/json (vendor/json.hpp).

#ifndef HYPERDP_REPORT_H_
#define HYPERDP_REPORT_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hyperdp/embeddings.h"
#include "hyperdp/mechanism.h"
#include "hyperdp/random.h"
#include "hyperdp/sampler.h"
#include "hyperdp/stats.h"

namespace hyperdp {

#ifndef HYPERDP_VERSION
#define HYPERDP_VERSION "0.0.0"
#endif

inline constexpr std::string_view kToolName = "hyperdp";
inline constexpr std::string_view kToolVersion = HYPERDP_VERSION;

enum class ReportFormat { kTsv, kJson };

inline std::optional<ReportFormat> ParseReportFormat(std::string_view s) {
  if (s == "tsv") return ReportFormat::kTsv;
  if (s == "json") return ReportFormat::kJson;
  return std::nullopt;
}

struct EmbeddingSource {
  std::string path;
  // Lowercase hex SHA-256 of the file bytes.
  std::string sha256;
};

struct ReportMetadata {
  std::string command;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  std::optional<Geometry> geometry;
  std::vector<EmbeddingSource> embeddings;
  // Further command-specific settings, written in insertion order.
  std::vector<std::pair<std::string, std::string>> settings;
};

namespace internal {

inline std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s;
  AppendShortest(s, v);
  return s;
}

// JSON has no infinities; they become null.
inline nlohmann::ordered_json JsonDouble(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace internal

inline nlohmann::ordered_json MetadataJson(const ReportMetadata& meta) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = meta.command;
  j["seed"] = meta.seed;
  j["rng_stream_version"] = kRngStreamVersion;
  j["epsilon"] = meta.epsilon ? nlohmann::ordered_json(*meta.epsilon) : nullptr;
  j["geometry"] = meta.geometry
                      ? nlohmann::ordered_json(std::string(GeometryName(*meta.geometry)))
                      : nullptr;
  nlohmann::ordered_json emb = nlohmann::ordered_json::array();
  for (const EmbeddingSource& e : meta.embeddings) {
    emb.push_back({{"path", e.path}, {"sha256", e.sha256}});
  }
  j["embeddings"] = std::move(emb);
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.settings) settings[k] = v;
  j["settings"] = std::move(settings);
  return j;
}

inline void WriteTsvMetadata(const ReportMetadata& meta, std::ostream& out) {
  out << "# tool\t" << kToolName << "\n# version\t" << kToolVersion
      << "\n# command\t" << meta.command << "\n# seed\t" << meta.seed
      << "\n# rng_stream_version\t" << kRngStreamVersion << '\n';
  if (meta.epsilon) {
    out << "# epsilon\t" << internal::FormatDouble(*meta.epsilon) << '\n';
  }
  if (meta.geometry) out << "# geometry\t" << GeometryName(*meta.geometry) << '\n';
  for (const EmbeddingSource& e : meta.embeddings) {
    out << "# embeddings\t" << e.path << "\t" << e.sha256 << '\n';
  }
  for (const auto& [k, v] : meta.settings) out << "# " << k << '\t' << v << '\n';
}

inline void WriteJson(const nlohmann::ordered_json& j, std::ostream& out) {
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Noise samples.

inline nlohmann::ordered_json SamplesJson(const NoiseStream& s,
                                          const ReportMetadata& meta) {
  nlohmann::ordered_json j;
  j["metadata"] = MetadataJson(meta);
  j["acceptance_rate"] = s.acceptance_rate;
  j["clamp_count"] = s.clamp_count;
  j["lag1_autocorrelation"] = s.lag1_autocorrelation;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const PoincareVec& p : s.samples) {
    rows.push_back(std::vector<double>(p.coords().begin(), p.coords().end()));
  }
  j["samples"] = std::move(rows);
  return j;
}

inline void WriteSamplesTsv(const NoiseStream& s, const ReportMetadata& meta,
                            std::ostream& out) {
  WriteTsvMetadata(meta, out);
  out << "# acceptance_rate\t" << internal::FormatDouble(s.acceptance_rate)
      << "\n# clamp_count\t" << s.clamp_count << "\n# lag1_autocorrelation\t"
      << internal::FormatDouble(s.lag1_autocorrelation) << '\n';
  const std::size_t dim = s.samples.empty() ? 0 : s.samples.front().dim();
  for (std::size_t i = 0; i < dim; ++i) out << (i ? "\t" : "") << 'x' << i;
  out << '\n';
  std::string line;
  for (const PoincareVec& p : s.samples) {
    line.clear();
    for (std::size_t i = 0; i < p.dim(); ++i) {
      if (i) line += '\t';
      internal::AppendShortest(line, p.coords()[i]);
    }
    line += '\n';
    out << line;
  }
}

// ---------------------------------------------------------------------------
// Privacy statistics.

inline nlohmann::ordered_json StatsJson(const PrivacyStats& stats,
                                        const Vocabulary& vocab,
                                        const ReportMetadata& meta) {
  nlohmann::ordered_json j;
  j["metadata"] = MetadataJson(meta);
  j["runs"] = stats.runs;
  j["sample_size"] = stats.records.size();
  const StatsAggregate& a = stats.aggregate;
  j["aggregate"] = {
      {"avg_n_w", a.avg_n_w},
      {"max_n_w", a.max_n_w},
      {"avg_s_w", a.avg_s_w},
      {"min_k_w", a.min_k_w ? nlohmann::ordered_json(*a.min_k_w) : nullptr}};
  nlohmann::ordered_json words = nlohmann::ordered_json::array();
  for (const WordRecord& rec : stats.records) {
    const EntropyProxies e = EntropyProxiesFor(rec);
    words.push_back(
        {{"word", vocab.word(rec.word)},
         {"runs", rec.runs},
         {"n_w", rec.n_w},
         {"s_w", rec.s_w},
         {"k_w", rec.k_w ? nlohmann::ordered_json(*rec.k_w) : nullptr},
         {"h0", internal::JsonDouble(e.h0)},
         {"h_inf", internal::JsonDouble(e.h_inf)}});
  }
  j["words"] = std::move(words);
  return j;
}

inline void WriteStatsTsv(const PrivacyStats& stats, const Vocabulary& vocab,
                          const ReportMetadata& meta, std::ostream& out) {
  WriteTsvMetadata(meta, out);
  const StatsAggregate& a = stats.aggregate;
  out << "# runs\t" << stats.runs << "\n# avg_n_w\t"
      << internal::FormatDouble(a.avg_n_w) << "\n# max_n_w\t" << a.max_n_w
      << "\n# avg_s_w\t" << internal::FormatDouble(a.avg_s_w) << '\n';
  if (a.min_k_w) out << "# min_k_w\t" << *a.min_k_w << '\n';
  out << "word\truns\tn_w\ts_w\tk_w\th0\th_inf\n";
  for (const WordRecord& rec : stats.records) {
    const EntropyProxies e = EntropyProxiesFor(rec);
    out << vocab.word(rec.word) << '\t' << rec.runs << '\t' << rec.n_w << '\t'
        << rec.s_w << '\t' << (rec.k_w ? std::to_string(*rec.k_w) : "NA")
        << '\t' << internal::FormatDouble(e.h0) << '\t'
        << internal::FormatDouble(e.h_inf) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Calibration.

inline nlohmann::ordered_json CalibrationJson(const CalibrationReport& r,
                                              const ReportMetadata& meta) {
  nlohmann::ordered_json j;
  j["metadata"] = MetadataJson(meta);
  j["runs"] = r.runs;
  j["sample_size"] = r.sample_size;
  j["hyperbolic"] = {{"epsilon", r.hyperbolic_epsilon},
                     {"worst_case_n_w", r.hyperbolic_worst_n_w},
                     {"expected_n_w", r.hyperbolic_expected_n_w}};
  j["euclidean"] = {{"epsilon", r.euclidean_epsilon},
                    {"worst_case_n_w", r.euclidean_worst_n_w},
                    {"expected_n_w", r.euclidean_expected_n_w}};
  j["worst_case_gap"] = r.worst_case_gap;
  nlohmann::ordered_json evals = nlohmann::ordered_json::array();
  for (const CalibrationPoint& p : r.evaluations) {
    evals.push_back({{"epsilon", p.epsilon},
                     {"worst_case_n_w", p.worst_n_w},
                     {"expected_n_w", p.expected_n_w}});
  }
  j["evaluations"] = std::move(evals);
  return j;
}

inline void WriteCalibrationTsv(const CalibrationReport& r,
                                const ReportMetadata& meta, std::ostream& out) {
  WriteTsvMetadata(meta, out);
  out << "# runs\t" << r.runs << "\n# sample_size\t" << r.sample_size
      << "\n# worst_case_gap\t" << internal::FormatDouble(r.worst_case_gap)
      << '\n';
  out << "geometry\tepsilon\tworst_case_n_w\texpected_n_w\n";
  out << "hyperbolic\t" << internal::FormatDouble(r.hyperbolic_epsilon) << '\t'
      << r.hyperbolic_worst_n_w << '\t'
      << internal::FormatDouble(r.hyperbolic_expected_n_w) << '\n';
  out << "euclidean\t" << internal::FormatDouble(r.euclidean_epsilon) << '\t'
      << r.euclidean_worst_n_w << '\t'
      << internal::FormatDouble(r.euclidean_expected_n_w) << '\n';
}

// ---------------------------------------------------------------------------
// Empirical d_chi-privacy check.

inline nlohmann::ordered_json DpRatioJson(const DpRatioReport& r,
                                          const Vocabulary& vocab,
                                          const ReportMetadata& meta) {
  nlohmann::ordered_json j;
  j["metadata"] = MetadataJson(meta);
  j["word"] = vocab.word(r.word);
  j["other_word"] = vocab.word(r.other);
  j["runs"] = r.runs;
  j["distance"] = r.distance;
  j["bound"] = r.bound;
  j["support_threshold"] = r.support_threshold;
  j["supported_outputs"] = r.supported_outputs;
  j["z"] = r.z;
  j["max_log_ratio"] = r.max_log_ratio;
  j["max_excess"] = internal::JsonDouble(r.max_excess);
  j["verdict"] = DpVerdictName(r.verdict);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const DpRatioRow& row : r.rows) {
    nlohmann::ordered_json o = {{"output", vocab.word(row.output)},
                                {"count", row.count},
                                {"other_count", row.other_count},
                                {"supported", row.supported}};
    if (row.supported) {
      o["log_ratio"] = row.log_ratio;
      o["slack"] = row.slack;
      o["within"] = row.within;
    }
    rows.push_back(std::move(o));
  }
  j["outputs"] = std::move(rows);
  return j;
}

inline void WriteDpRatioTsv(const DpRatioReport& r, const Vocabulary& vocab,
                            const ReportMetadata& meta, std::ostream& out) {
  WriteTsvMetadata(meta, out);
  out << "# word\t" << vocab.word(r.word) << "\n# other_word\t"
      << vocab.word(r.other) << "\n# runs\t" << r.runs << "\n# bound\t"
      << internal::FormatDouble(r.bound) << "\n# max_log_ratio\t"
      << internal::FormatDouble(r.max_log_ratio) << "\n# verdict\t"
      << DpVerdictName(r.verdict) << '\n';
  out << "output\tcount\tother_count\tlog_ratio\tslack\twithin\n";
  for (const DpRatioRow& row : r.rows) {
    out << vocab.word(row.output) << '\t' << row.count << '\t'
        << row.other_count << '\t';
    if (row.supported) {
      out << internal::FormatDouble(row.log_ratio) << '\t'
          << internal::FormatDouble(row.slack) << '\t'
          << (row.within ? "yes" : "no") << '\n';
    } else {
      out << "NA\tNA\tNA\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Redaction status sidecar: one row per token.

inline void WriteStatusHeader(std::ostream& out) {
  out << "line\tposition\toriginal\treleased\tstatus\n";
}

inline void WriteStatusRows(std::size_t line, const RedactionResult& r,
                            std::ostream& out) {
  for (std::size_t i = 0; i < r.status.size(); ++i) {
    out << line << '\t' << i << '\t' << r.original_tokens[i] << '\t'
        << r.released_tokens[i] << '\t' << TokenStatusName(r.status[i]) << '\n';
  }
}

}  // namespace hyperdp

#endif  // HYPERDP_REPORT_H_
