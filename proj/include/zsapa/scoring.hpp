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

#ifndef ZSAPA_SCORING_HPP_
#define ZSAPA_SCORING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "zsapa/backend.hpp"
#include "zsapa/masking.hpp"
#include "zsapa/quantizer.hpp"

namespace zsapa {

/// Scoring hyperparameters. Defaults: p = 0.2, l = 5, k = 50, layer 7.
struct ScoreConfig {
  MaskStrategy strategy = MaskStrategy::kRandom;
  double mask_prob = 0.2;  // fraction of frames, (0, 1]
  int mask_len = 5;
  int reps = 50;
  int slices = 20;
  int layer = 7;
  std::uint64_t seed = 13;
  bool normalize = false;
  bool literal_start_fraction = false;

  /// Throws Error{kInvalidParams} for values no utterance could satisfy.
  void Validate() const;

  RandomMaskParams RandomParams() const;
};

MaskPlan MakePlan(std::size_t T, const ScoreConfig& config, std::string_view utterance);

struct AmrtResult {
  double amrt = 0.0;
  std::size_t total_mismatches = 0;
  std::vector<std::size_t> per_repetition_mismatches;
};

/// Average count of masked positions whose recovered token differs from the
/// clean-pass token. `recovered[j]` must carry exactly the positions of
/// repetition j. Throws Error{kPlanMismatch | kLengthMismatch}.
AmrtResult ComputeAmrt(const TokenSequence& reference, std::span<const TokenSequence> recovered,
                       const MaskPlan& plan);

struct ScoreReport {
  std::string utterance_id;
  std::size_t T = 0;
  double amrt = 0.0;
  double score = 0.0;
  std::vector<std::size_t> per_repetition_mismatches;
  double mean_masked = 0.0;  // mean |M_j|, the normalizer of the normalized variant
  ScoreConfig config;
};

/// -amrt, or -amrt / mean_masked when normalizing. Never returns -0.0.
double FinalScore(double amrt, double mean_masked, bool normalize);

/// Clean-pass frames and reference tokens of one utterance; reusable across
/// seeds and repetitions.
struct PreparedUtterance {
  std::string utterance_id;
  FrameSequence frames;
  TokenSequence reference;
  int layer = 0;
};

PreparedUtterance PrepareUtterance(Backend& backend, const AudioClip& clip, int layer,
                                   std::string utterance_id);

ScoreReport ScorePrepared(Backend& backend, const PreparedUtterance& prepared, const ScoreConfig& config);

/// Full pipeline for one clip: encode, clean pass, tokenize, plan masks,
/// masked passes, tokenize the masked rows, aMRT, score.
ScoreReport Score(Backend& backend, const AudioClip& clip, const ScoreConfig& config,
                  std::string utterance_id = {});

nlohmann::ordered_json ConfigToJson(const ScoreConfig& config);
nlohmann::ordered_json ReportToJson(const ScoreReport& report);

}  // namespace zsapa

#endif  // ZSAPA_SCORING_HPP_
