// Copyright 2026 The zs-apa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSAPA_HARNESS_HPP_
#define ZSAPA_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "zsapa/backend.hpp"
#include "zsapa/scoring.hpp"

namespace zsapa {

inline constexpr double kMinHumanScore = 0.0;
inline constexpr double kMaxHumanScore = 10.0;

struct ManifestEntry {
  std::string utt_id;
  std::filesystem::path wav;
  double human_score = 0.0;
};

/// JSON-lines manifest, one {"utt_id", "wav", "score"} object per line.
/// Relative wav paths are resolved against the manifest's directory. Blank
/// lines are skipped. Throws Error{kInvalidManifest} naming the line.
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path);
std::vector<ManifestEntry> ParseManifest(std::istream& in, const std::filesystem::path& base_dir);
void WriteManifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Sample Pearson correlation, two-pass in double precision.
/// Throws Error{kLengthMismatch} for unequal or < 2 lengths and
/// Error{kDegenerateInput} when either side has zero variance.
double Pearson(std::span<const double> xs, std::span<const double> ys);

struct EvalOptions {
  std::vector<std::uint64_t> seeds{13, 21, 100};
  int workers = 1;
  bool skip_missing = false;
};

struct UtteranceResult {
  std::string utt_id;
  double human_score = 0.0;
  double score = 0.0;  // mean over runs
  double amrt = 0.0;   // mean over runs
  std::vector<double> run_scores;
  std::vector<double> run_amrt;
};

struct EvalResult {
  std::vector<UtteranceResult> per_utterance;               // sorted by utt_id
  std::vector<std::pair<std::string, double>> pcc_per_run;  // seed (or "regular") -> PCC
  double pcc_mean = 0.0;
  double pcc_std = 0.0;  // population standard deviation over runs
  ScoreConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> skipped;
};

/// Scores every utterance once per seed (once in total for regular masking)
/// and correlates engine scores with the human scores. Utterances are spread
/// over `workers` threads, each with its own backend from `factory`;
/// aggregation runs in utt_id order so the result does not depend on the
/// worker count. Throws Error{kMissingAudio} unless skip_missing is set.
EvalResult Evaluate(std::span<const ManifestEntry> manifest, const BackendFactory& factory,
                    const ScoreConfig& config, const EvalOptions& options);

nlohmann::ordered_json EvalResultToJson(const EvalResult& result);

enum class SweepParam { kMaskProb, kMaskLen, kLayer, kSlices };

/// Accepts both "mask_prob" and "mask-prob" spellings.
SweepParam ParseSweepParam(std::string_view name);
std::string_view SweepParamName(SweepParam p);

/// Returns `base` with `param` set to `value`. Slices switch the strategy to
/// regular; mask probability and length switch it to random. Throws
/// Error{kInvalidParams} for values outside the parameter's domain.
ScoreConfig ApplySweepValue(const ScoreConfig& base, SweepParam param, double value);

struct SweepRow {
  SweepParam param;
  double value = 0.0;
  double pcc_mean = 0.0;
  double pcc_std = 0.0;
};

std::vector<SweepRow> Sweep(std::span<const ManifestEntry> manifest, const BackendFactory& factory,
                            const ScoreConfig& base, SweepParam param, std::span<const double> values,
                            const EvalOptions& options);

/// CSV with header `param,value,pcc_mean,pcc_std`.
std::string SweepToCsv(std::span<const SweepRow> rows);

/// Shortest decimal text that round-trips to `v`.
std::string FormatNumber(double v);

/// Builds a manifest from a speechocean762-style scores JSON (utterance id ->
/// object with a sentence-level "total") and a WAV directory. When the
/// directory holds a Kaldi wav.scp, only its utterances are taken and its
/// paths are used; otherwise <utt_id>.wav is searched recursively.
/// Throws Error{kInvalidManifest} for malformed or out-of-range scores and
/// Error{kMissingAudio} listing every utterance without audio.
std::vector<ManifestEntry> ConvertScores(const std::filesystem::path& scores_path,
                                         const std::filesystem::path& wav_dir);

}  // namespace zsapa

#endif  // ZSAPA_HARNESS_HPP_
