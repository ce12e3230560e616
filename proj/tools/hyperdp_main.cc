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

// hyperdp command-line tool.
//
// Exit codes: 0 success, 1 data error, 2 usage error, 3 check-dp FAIL,
// 4 check-dp insufficient support.

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperdp/hyperdp.h"

namespace hyperdp {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFail = 3;
constexpr int kExitInsufficient = 4;

// Bad flag values detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

std::string ToString(double v) { return internal::FormatDouble(v); }

// Shared flag groups.

struct SamplerFlags {
  std::int64_t burn_in = SamplerConfig{}.burn_in;
  double proposal_scale = SamplerConfig{}.proposal_scale;
  std::int64_t thinning = SamplerConfig{}.thinning;
  std::string proposal = "in-ball";

  void Add(CLI::App* app) {
    app->add_option("--burn-in", burn_in, "MH burn-in steps")
        ->capture_default_str();
    app->add_option("--proposal-scale", proposal_scale,
                    "Std. deviation of the Gaussian proposal")
        ->capture_default_str();
    app->add_option("--thinning", thinning, "Chain steps per released state")
        ->capture_default_str();
    app->add_option("--proposal", proposal, "Proposal kind")
        ->check(CLI::IsMember({"in-ball", "translated"}))
        ->capture_default_str();
  }

  SamplerConfig Config() const {
    SamplerConfig c;
    c.burn_in = burn_in;
    c.proposal_scale = proposal_scale;
    c.thinning = thinning;
    c.proposal = *ParseProposalKind(proposal);
    return c;
  }

  void Describe(ReportMetadata& meta) const {
    meta.settings.emplace_back("burn_in", std::to_string(burn_in));
    meta.settings.emplace_back("proposal_scale", ToString(proposal_scale));
    meta.settings.emplace_back("thinning", std::to_string(thinning));
    meta.settings.emplace_back("proposal", proposal);
  }
};

struct VocabFlags {
  std::string path;
  std::string geometry = "hyperbolic";
  bool clamp = false;

  void Add(CLI::App* app, bool with_geometry = true) {
    app->add_option("--embeddings", path, "Embedding file")->required();
    if (with_geometry) {
      app->add_option("--geometry", geometry, "Embedding geometry")
          ->check(CLI::IsMember({"hyperbolic", "euclidean"}))
          ->capture_default_str();
    }
    app->add_flag("--clamp", clamp,
                  "Project hyperbolic rows with norm >= 1 into the ball");
  }
};

struct OutputFlags {
  std::string path = "-";
  std::string format = "tsv";

  void Add(CLI::App* app, bool with_format = true) {
    app->add_option("--output,-o", path, "Output file ('-' for stdout)")
        ->capture_default_str();
    if (with_format) {
      app->add_option("--format", format, "Report format")
          ->check(CLI::IsMember({"tsv", "json"}))
          ->capture_default_str();
    }
  }
};

void RequirePositive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw UsageError(std::string(name) + " must be a positive finite number");
  }
}

struct LoadedVocab {
  Vocabulary vocab;
  EmbeddingSource source;
};

LoadedVocab Load(const std::string& path, Geometry g, bool clamp) {
  LoadOptions opts;
  opts.geometry = g;
  opts.clamp = clamp;
  LoadResult r = LoadEmbeddings(path, opts);
  if (r.clamped_rows > 0) {
    std::cerr << "hyperdp: projected " << r.clamped_rows
              << " row(s) into the ball\n";
  }
  return {std::move(r.vocabulary), {path, Sha256File(path)}};
}

// Writes via `fn` to stdout or a file.
template <typename Fn>
void WithOutput(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MechanismConfig BuildMechanismConfig(double epsilon, const SamplerFlags& sf,
                                     const std::string& noise,
                                     const std::string& policy,
                                     const std::string& stopwords) {
  RequirePositive(epsilon, "--epsilon");
  MechanismConfig cfg;
  cfg.epsilon = epsilon;
  cfg.sampler = sf.Config();
  cfg.noise = *ParseNoiseApplication(noise);
  try {
    cfg.policy = SelectionPolicy::Parse(policy);
    cfg.sampler.epsilon = epsilon;
    cfg.sampler.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!stopwords.empty()) cfg.stopwords = StopwordList::FromFile(stopwords);
  return cfg;
}

// ---------------------------------------------------------------------------

struct RedactCmd {
  VocabFlags vf;
  SamplerFlags sf;
  OutputFlags of;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  std::string policy = "nonstop";
  std::string stopwords;
  std::string noise = "ambient";
  std::string input = "-";
  std::string status;

  void Add(CLI::App* app) {
    vf.Add(app);
    sf.Add(app);
    of.Add(app, false);
    app->add_option("--epsilon", epsilon, "Privacy parameter")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--policy", policy, "all | nonstop | slots:<i,j,...>")
        ->capture_default_str();
    app->add_option("--stopwords", stopwords, "Stopword file (one per line)");
    app->add_option("--noise", noise, "Noise application")
        ->check(CLI::IsMember({"ambient", "mobius"}))
        ->capture_default_str();
    app->add_option("--input,-i", input, "Input text ('-' for stdin)")
        ->capture_default_str();
    app->add_option("--status", status, "Per-token status TSV sidecar");
  }

  int Run() const {
    const MechanismConfig cfg =
        BuildMechanismConfig(epsilon, sf, noise, policy, stopwords);
    const LoadedVocab lv = Load(vf.path, *ParseGeometry(vf.geometry), vf.clamp);
    const Mechanism mech(lv.vocab, cfg);

    std::ifstream file;
    std::istream* in = &std::cin;
    if (input != "-") {
      file.open(input, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + input);
      in = &file;
    }
    std::ostringstream text, sidecar;
    WriteStatusHeader(sidecar);
    std::string line;
    for (std::uint64_t index = 0; std::getline(*in, line); ++index) {
      const bool cr = !line.empty() && line.back() == '\r';
      if (cr) line.pop_back();
      RedactionResult detail;
      text << mech.RedactLine(line, DeriveSeed(seed, index), &detail)
           << (cr ? "\r\n" : "\n");
      WriteStatusRows(index, detail, sidecar);
    }
    WithOutput(of.path, [&](std::ostream& o) { o << text.str(); });
    if (!status.empty()) {
      WithOutput(status, [&](std::ostream& o) { o << sidecar.str(); });
    }
    return kExitOk;
  }
};

struct SampleCmd {
  SamplerFlags sf;
  OutputFlags of;
  std::size_t dim = 2;
  double epsilon = 1.0;
  std::int64_t count = 1000;
  std::uint64_t seed = 0;

  void Add(CLI::App* app) {
    sf.Add(app);
    of.Add(app);
    app->add_option("--dim,-n", dim, "Dimension")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Privacy parameter")->capture_default_str();
    app->add_option("--count,-k", count, "Number of released samples")
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed")->capture_default_str();
  }

  int Run() const {
    RequirePositive(epsilon, "--epsilon");
    SamplerConfig cfg = sf.Config();
    cfg.dim = dim;
    cfg.epsilon = epsilon;
    cfg.count = count;
    cfg.seed = seed;
    try {
      cfg.Validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const NoiseStream s = MhSample(cfg);
    ReportMetadata meta{"sample", seed, epsilon, Geometry::kHyperbolic, {}, {}};
    meta.settings.emplace_back("dim", std::to_string(dim));
    meta.settings.emplace_back("count", std::to_string(count));
    sf.Describe(meta);
    WithOutput(of.path, [&](std::ostream& o) {
      if (of.format == "json") {
        WriteJson(SamplesJson(s, meta), o);
      } else {
        WriteSamplesTsv(s, meta, o);
      }
    });
    return kExitOk;
  }
};

struct StatsCmd {
  VocabFlags vf;
  SamplerFlags sf;
  OutputFlags of;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  std::int64_t runs = 1000;
  std::size_t sample_size = 0;
  unsigned threads = 1;
  std::string noise = "ambient";

  void Add(CLI::App* app) {
    vf.Add(app);
    sf.Add(app);
    of.Add(app);
    app->add_option("--epsilon", epsilon, "Privacy parameter")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--runs", runs, "Mechanism runs per word")->capture_default_str();
    app->add_option("--sample-size", sample_size, "Words to sample (0 = all)")
        ->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->capture_default_str();
    app->add_option("--noise", noise, "Noise application")
        ->check(CLI::IsMember({"ambient", "mobius"}))
        ->capture_default_str();
  }

  int Run() const {
    if (runs < 1) throw UsageError("--runs must be >= 1");
    const MechanismConfig cfg = BuildMechanismConfig(epsilon, sf, noise, "all", "");
    const LoadedVocab lv = Load(vf.path, *ParseGeometry(vf.geometry), vf.clamp);
    const Mechanism mech(lv.vocab, cfg);
    const auto sample = SampleWords(lv.vocab, sample_size, DeriveSeed(seed, 0));
    const PrivacyStats stats = EstimateStats(mech, sample, runs, seed, threads);
    ReportMetadata meta{"stats", seed, epsilon, lv.vocab.geometry(), {lv.source}, {}};
    meta.settings.emplace_back("runs", std::to_string(runs));
    meta.settings.emplace_back("noise", noise);
    sf.Describe(meta);
    WithOutput(of.path, [&](std::ostream& o) {
      if (of.format == "json") {
        WriteJson(StatsJson(stats, lv.vocab, meta), o);
      } else {
        WriteStatsTsv(stats, lv.vocab, meta, o);
      }
    });
    return kExitOk;
  }
};

struct CalibrateCmd {
  VocabFlags vf;
  SamplerFlags sf;
  OutputFlags of;
  std::string euclidean_path;
  double epsilon = 1.0;
  std::vector<double> grid;
  int refine = CalibrationOptions{}.refine_iterations;
  std::uint64_t seed = 0;
  std::int64_t runs = 1000;
  std::size_t sample_size = 0;
  unsigned threads = 1;

  void Add(CLI::App* app) {
    vf.Add(app, false);
    sf.Add(app);
    of.Add(app);
    app->add_option("--euclidean-embeddings", euclidean_path,
                    "Euclidean embedding file with the same words")
        ->required();
    app->add_option("--epsilon", epsilon, "Hyperbolic privacy parameter")
        ->capture_default_str();
    app->add_option("--grid", grid, "Euclidean epsilon candidates")
        ->delimiter(',')
        ->required();
    app->add_option("--refine", refine, "Bisection steps inside the bracket")
        ->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--runs", runs, "Mechanism runs per word")->capture_default_str();
    app->add_option("--sample-size", sample_size, "Words to sample (0 = all)")
        ->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->capture_default_str();
  }

  int Run() const {
    if (runs < 1) throw UsageError("--runs must be >= 1");
    if (refine < 0) throw UsageError("--refine must be >= 0");
    CalibrationOptions opts;
    opts.mechanism = BuildMechanismConfig(epsilon, sf, "ambient", "all", "");
    opts.hyperbolic_epsilon = epsilon;
    opts.grid = grid;
    opts.runs = runs;
    opts.seed = seed;
    opts.refine_iterations = refine;
    opts.threads = threads;
    const LoadedVocab hyp = Load(vf.path, Geometry::kHyperbolic, vf.clamp);
    const LoadedVocab euc = Load(euclidean_path, Geometry::kEuclidean, false);
    opts.sample = SampleWords(hyp.vocab, sample_size, DeriveSeed(seed, 0));
    CalibrationReport report;
    try {
      report = CalibrateEuclidean(hyp.vocab, euc.vocab, opts);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(e.what());
    }
    ReportMetadata meta{"calibrate", seed, epsilon, std::nullopt,
                        {hyp.source, euc.source}, {}};
    std::string g;
    for (double e : grid) g += (g.empty() ? "" : ",") + ToString(e);
    meta.settings.emplace_back("grid", g);
    meta.settings.emplace_back("refine", std::to_string(refine));
    sf.Describe(meta);
    WithOutput(of.path, [&](std::ostream& o) {
      if (of.format == "json") {
        WriteJson(CalibrationJson(report, meta), o);
      } else {
        WriteCalibrationTsv(report, meta, o);
      }
    });
    return kExitOk;
  }
};

struct CheckDpCmd {
  VocabFlags vf;
  SamplerFlags sf;
  OutputFlags of;
  std::string word, other;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  std::int64_t runs = 100000;
  std::int64_t support = DpCheckOptions{}.support_threshold;
  std::string noise = "ambient";

  void Add(CLI::App* app) {
    // The ratio slack assumes independent draws, so this check defaults to a
    // chain that mixes between released states.
    sf.proposal_scale = kMixingProposalScale;
    sf.thinning = kMixingThinning;
    vf.Add(app);
    sf.Add(app);
    of.Add(app);
    app->add_option("--word", word, "First input word")->required();
    app->add_option("--other-word", other, "Second input word")->required();
    app->add_option("--epsilon", epsilon, "Privacy parameter")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--runs", runs, "Mechanism runs per word")->capture_default_str();
    app->add_option("--support-threshold", support,
                    "Minimum count per side for a compared output")
        ->capture_default_str();
    app->add_option("--noise", noise, "Noise application")
        ->check(CLI::IsMember({"ambient", "mobius"}))
        ->capture_default_str();
  }

  int Run() const {
    if (runs < 1) throw UsageError("--runs must be >= 1");
    if (support < 1) throw UsageError("--support-threshold must be >= 1");
    const MechanismConfig cfg = BuildMechanismConfig(epsilon, sf, noise, "all", "");
    const LoadedVocab lv = Load(vf.path, *ParseGeometry(vf.geometry), vf.clamp);
    const auto w = lv.vocab.Find(word);
    const auto w2 = lv.vocab.Find(other);
    if (!w || !w2) {
      throw UsageError("word not in vocabulary: " + (w ? other : word));
    }
    const Mechanism mech(lv.vocab, cfg);
    DpCheckOptions opts;
    opts.support_threshold = support;
    const DpRatioReport r = EmpiricalDpRatio(mech, *w, *w2, runs, seed, opts);
    ReportMetadata meta{"check-dp", seed, epsilon, lv.vocab.geometry(), {lv.source}, {}};
    meta.settings.emplace_back("noise", noise);
    sf.Describe(meta);
    WithOutput(of.path, [&](std::ostream& o) {
      if (of.format == "json") {
        WriteJson(DpRatioJson(r, lv.vocab, meta), o);
      } else {
        WriteDpRatioTsv(r, lv.vocab, meta, o);
      }
    });
    std::cerr << DpVerdictName(r.verdict) << ": max |log ratio| "
              << ToString(r.max_log_ratio) << ", bound " << ToString(r.bound)
              << ", " << r.supported_outputs << " compared output(s)\n";
    switch (r.verdict) {
      case DpVerdict::kPass:
        return kExitOk;
      case DpVerdict::kFail:
        return kExitFail;
      case DpVerdict::kInsufficientSupport:
        return kExitInsufficient;
    }
    return kExitFail;
  }
};

struct GenFixtureCmd {
  TaxonomyOptions opts;
  std::string geometry = "hyperbolic";
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--depth", opts.depth, "Tree depth")->capture_default_str();
    app->add_option("--branching", opts.branching, "Children per node")
        ->capture_default_str();
    app->add_option("--dim", opts.dim, "Embedding dimension")->capture_default_str();
    app->add_option("--seed", opts.seed, "Seed")->capture_default_str();
    app->add_option("--geometry", geometry, "Embedding geometry")
        ->check(CLI::IsMember({"hyperbolic", "euclidean"}))
        ->capture_default_str();
    app->add_option("--level-spacing", opts.level_spacing,
                    "Hyperbolic distance between levels")
        ->capture_default_str();
    app->add_option("--jitter", opts.jitter, "Relative angular jitter")
        ->capture_default_str();
    app->add_option("--output,-o", output, "Output file ('-' for stdout)")
        ->required();
  }

  int Run() {
    opts.geometry = *ParseGeometry(geometry);
    SyntheticTaxonomy t;
    try {
      t = GenerateSyntheticTaxonomy(opts);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    WithOutput(output, [&](std::ostream& o) { SaveEmbeddings(t.vocabulary, o); });
    return kExitOk;
  }
};

int Main(int argc, char** argv) {
  CLI::App app{"Hyperbolic metric-DP text perturbation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  RedactCmd redact;
  SampleCmd sample;
  StatsCmd stats;
  CalibrateCmd calibrate;
  CheckDpCmd check_dp;
  GenFixtureCmd gen;
  auto* redact_app = app.add_subcommand("redact", "Perturb words of each input line");
  auto* sample_app = app.add_subcommand("sample", "Draw hyperbolic noise vectors");
  auto* stats_app = app.add_subcommand("stats", "Estimate N_w, S_w, K_w");
  auto* calibrate_app =
      app.add_subcommand("calibrate", "Match Euclidean epsilon to worst-case N_w");
  auto* check_app =
      app.add_subcommand("check-dp", "Empirically check the d_chi-privacy bound");
  auto* gen_app = app.add_subcommand("gen-fixture", "Write a synthetic taxonomy");
  redact.Add(redact_app);
  sample.Add(sample_app);
  stats.Add(stats_app);
  calibrate.Add(calibrate_app);
  check_dp.Add(check_app);
  gen.Add(gen_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*redact_app) return redact.Run();
    if (*sample_app) return sample.Run();
    if (*stats_app) return stats.Run();
    if (*calibrate_app) return calibrate.Run();
    if (*check_app) return check_dp.Run();
    if (*gen_app) return gen.Run();
  } catch (const UsageError& e) {
    std::cerr << "hyperdp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "hyperdp: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace hyperdp

int main(int argc, char** argv) { return hyperdp::Main(argc, argv); }
