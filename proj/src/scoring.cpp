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

#include "zsapa/scoring.hpp"

#include <string>

#include "zsapa/error.hpp"

namespace zsapa {

void ScoreConfig::Validate() const {
  const auto bad = [](const std::string& why) { return Error(ErrorCode::kInvalidParams, why); };
  if (layer < 1) throw bad("layer must be at least 1");
  if (strategy == MaskStrategy::kRandom) {
    if (!(mask_prob > 0.0) || mask_prob > 1.0) throw bad("mask probability must be in (0, 1]");
    if (mask_len < 1) throw bad("mask length must be at least 1");
    if (reps < 1) throw bad("repetitions must be at least 1");
  } else if (slices < 1) {
    throw bad("slices must be at least 1");
  }
}

RandomMaskParams ScoreConfig::RandomParams() const {
  return RandomMaskParams{mask_prob * 100.0, mask_len, reps, literal_start_fraction};
}

MaskPlan MakePlan(std::size_t T, const ScoreConfig& config, std::string_view utterance) {
  if (config.strategy == MaskStrategy::kRegular) return PlanRegularMasks(T, config.slices);
  return PlanRandomMasks(T, config.RandomParams(), config.seed, utterance);
}

AmrtResult ComputeAmrt(const TokenSequence& reference, std::span<const TokenSequence> recovered,
                       const MaskPlan& plan) {
  if (reference.tokens.size() != plan.T) {
    throw Error(ErrorCode::kLengthMismatch, "reference has " + std::to_string(reference.tokens.size()) +
                                                " tokens, plan covers " + std::to_string(plan.T) + " frames");
  }
  if (recovered.size() != plan.k()) {
    throw Error(ErrorCode::kPlanMismatch, std::to_string(recovered.size()) + " recovered sequences for " +
                                              std::to_string(plan.k()) + " repetitions");
  }
  AmrtResult result;
  result.per_repetition_mismatches.reserve(plan.k());
  for (std::size_t j = 0; j < plan.k(); ++j) {
    const TokenSequence& rec = recovered[j];
    const IndexSet& mask = plan.repetitions[j];
    if (!rec.positions || *rec.positions != mask) {
      throw Error(ErrorCode::kPlanMismatch, "recovered positions of repetition " + std::to_string(j) +
                                                " differ from its mask set");
    }
    if (rec.tokens.size() != mask.size()) {
      throw Error(ErrorCode::kLengthMismatch, "repetition " + std::to_string(j) + " has " +
                                                  std::to_string(rec.tokens.size()) + " tokens for " +
                                                  std::to_string(mask.size()) + " positions");
    }
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (rec.tokens[i] != reference.tokens[mask[i]]) ++mismatches;
    }
    result.per_repetition_mismatches.push_back(mismatches);
    result.total_mismatches += mismatches;
  }
  result.amrt = plan.k() == 0 ? 0.0
                              : static_cast<double>(result.total_mismatches) / static_cast<double>(plan.k());
  return result;
}

double FinalScore(double amrt, double mean_masked, bool normalize) {
  if (amrt == 0.0) return 0.0;
  return normalize ? -amrt / mean_masked : -amrt;
}

PreparedUtterance PrepareUtterance(Backend& backend, const AudioClip& clip, int layer, std::string utterance_id) {
  PreparedUtterance prep;
  prep.utterance_id = utterance_id.empty() ? clip.source_id : std::move(utterance_id);
  prep.layer = layer;
  prep.frames = backend.EncodeFrames(clip);
  const Codebook& cb = backend.CodebookFor(layer);
  prep.reference = Tokenize(backend.Contextualize(prep.frames, {}, layer), cb);
  return prep;
}

ScoreReport ScorePrepared(Backend& backend, const PreparedUtterance& prepared, const ScoreConfig& config) {
  config.Validate();
  if (prepared.layer != config.layer) {
    throw Error(ErrorCode::kLayerMismatch, "utterance prepared for layer " + std::to_string(prepared.layer) +
                                               ", config asks for layer " + std::to_string(config.layer));
  }
  const std::size_t T = prepared.frames.T();
  const MaskPlan plan = MakePlan(T, config, prepared.utterance_id);
  const Codebook& cb = backend.CodebookFor(config.layer);

  const std::vector<LayerFeatures> masked = backend.ContextualizeBatch(prepared.frames, plan.repetitions, config.layer);
  std::vector<TokenSequence> recovered;
  recovered.reserve(plan.k());
  double masked_total = 0.0;
  for (std::size_t j = 0; j < plan.k(); ++j) {
    recovered.push_back(TokenizeRows(masked[j], cb, plan.repetitions[j]));
    masked_total += static_cast<double>(plan.repetitions[j].size());
  }
  const AmrtResult amrt = ComputeAmrt(prepared.reference, recovered, plan);

  ScoreReport report;
  report.utterance_id = prepared.utterance_id;
  report.T = T;
  report.amrt = amrt.amrt;
  report.per_repetition_mismatches = amrt.per_repetition_mismatches;
  report.mean_masked = masked_total / static_cast<double>(plan.k());
  report.score = FinalScore(report.amrt, report.mean_masked, config.normalize);
  report.config = config;
  return report;
}

ScoreReport Score(Backend& backend, const AudioClip& clip, const ScoreConfig& config, std::string utterance_id) {
  config.Validate();
  const PreparedUtterance prep = PrepareUtterance(backend, clip, config.layer, std::move(utterance_id));
  return ScorePrepared(backend, prep, config);
}

nlohmann::ordered_json ConfigToJson(const ScoreConfig& c) {
  nlohmann::ordered_json j;
  j["strategy"] = std::string(MaskStrategyName(c.strategy));
  if (c.strategy == MaskStrategy::kRandom) {
    j["p"] = c.mask_prob;
    j["l"] = c.mask_len;
    j["k"] = c.reps;
  } else {
    j["slices"] = c.slices;
  }
  j["layer"] = c.layer;
  if (c.strategy == MaskStrategy::kRandom) {
    j["seed"] = c.seed;
    j["literal_start_fraction"] = c.literal_start_fraction;
  }
  j["normalized"] = c.normalize;
  return j;
}

nlohmann::ordered_json ReportToJson(const ScoreReport& r) {
  nlohmann::ordered_json j;
  j["utterance_id"] = r.utterance_id;
  j["T"] = r.T;
  j["amrt"] = r.amrt;
  j["score"] = r.score;
  j["per_repetition_mismatches"] = r.per_repetition_mismatches;
  j["config"] = ConfigToJson(r.config);
  return j;
}

}  // namespace zsapa
