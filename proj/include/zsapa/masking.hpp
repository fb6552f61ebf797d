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

#ifndef ZSAPA_MASKING_HPP_
#define ZSAPA_MASKING_HPP_

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "zsapa/features.hpp"

namespace zsapa {

enum class MaskStrategy { kRandom, kRegular };

std::string_view MaskStrategyName(MaskStrategy s);
MaskStrategy ParseMaskStrategy(std::string_view name);

struct RandomMaskParams {
  double percent = 20.0;  // p, in (0, 100]
  int span = 5;           // l, frames
  int repetitions = 50;   // k
  // Treat `percent` as the share of frames used as span starts instead of
  // the share of frames masked.
  bool literal_start_fraction = false;
};

/// k masked index sets over T frames. Each set is sorted ascending.
struct MaskPlan {
  MaskStrategy strategy = MaskStrategy::kRandom;
  std::size_t T = 0;
  std::vector<IndexSet> repetitions;
  RandomMaskParams random;  // random strategy only
  int slices = 0;           // regular strategy only
  std::uint64_t seed = 0;   // random strategy only

  std::size_t k() const noexcept { return repetitions.size(); }
};

/// Stateless 64-bit mixer used to derive per-(utterance, repetition) seeds.
std::uint64_t SplitMix64(std::uint64_t x);

/// FNV-1a over the bytes of `s`.
std::uint64_t Fnv1a64(std::string_view s);

/// Seed for repetition `rep` of utterance `utterance` under base `seed`.
std::uint64_t RepetitionSeed(std::uint64_t seed, std::string_view utterance, std::uint64_t rep);

/// Span count per repetition: max(1, round(p/100 * T / l)), or
/// max(1, round(p/100 * T)) when `literal_start_fraction` is set.
std::size_t TargetSpanCount(std::size_t T, const RandomMaskParams& params);

/// Disjoint length-l spans drawn by rejection over a seeded shuffle of the
/// start positions [0, T - l]. If T < l the single span [0, T) is used.
/// Throws Error{kInvalidParams}.
MaskPlan PlanRandomMasks(std::size_t T, const RandomMaskParams& params, std::uint64_t seed,
                         std::string_view utterance = {});

/// Exact partition of [0, T) into `slices` contiguous pieces; the first
/// T % slices pieces are one frame longer. Throws Error{kInvalidParams}.
MaskPlan PlanRegularMasks(std::size_t T, int slices);

struct CoverageStats {
  std::size_t frames_covered = 0;
  std::vector<std::size_t> per_frame_counts;  // length T
};

CoverageStats ComputeCoverage(const MaskPlan& plan);

}  // namespace zsapa

#endif  // ZSAPA_MASKING_HPP_
