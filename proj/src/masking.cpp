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

#include "zsapa/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "zsapa/error.hpp"

namespace zsapa {

namespace {

// Uniform integer in [0, bound) by rejection; std::uniform_int_distribution
// is implementation-defined and would make plans platform dependent.
std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

void CheckRandomParams(std::size_t T, const RandomMaskParams& p) {
  if (T < 1) throw Error(ErrorCode::kInvalidParams, "T must be at least 1");
  if (!(p.percent > 0.0) || p.percent > 100.0) {
    throw Error(ErrorCode::kInvalidParams, "mask percent must be in (0, 100]");
  }
  if (p.span < 1) throw Error(ErrorCode::kInvalidParams, "mask length must be at least 1");
  if (p.repetitions < 1) throw Error(ErrorCode::kInvalidParams, "repetitions must be at least 1");
}

IndexSet SampleSpans(std::size_t T, std::size_t span, std::size_t target, std::uint64_t seed) {
  if (T < span) {
    IndexSet all(T);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  std::vector<std::size_t> starts(T - span + 1);
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = starts.size(); i > 1; --i) {
    std::swap(starts[i - 1], starts[UniformBelow(rng, i)]);
  }

  std::vector<bool> taken(T, false);
  std::size_t accepted = 0;
  for (std::size_t s : starts) {
    if (accepted == target) break;
    if (std::any_of(taken.begin() + static_cast<std::ptrdiff_t>(s),
                    taken.begin() + static_cast<std::ptrdiff_t>(s + span), [](bool b) { return b; })) {
      continue;
    }
    std::fill(taken.begin() + static_cast<std::ptrdiff_t>(s), taken.begin() + static_cast<std::ptrdiff_t>(s + span),
              true);
    ++accepted;
  }

  IndexSet out;
  out.reserve(accepted * span);
  for (std::size_t t = 0; t < T; ++t) {
    if (taken[t]) out.push_back(t);
  }
  return out;
}

}  // namespace

std::string_view MaskStrategyName(MaskStrategy s) {
  return s == MaskStrategy::kRandom ? "random" : "regular";
}

MaskStrategy ParseMaskStrategy(std::string_view name) {
  if (name == "random") return MaskStrategy::kRandom;
  if (name == "regular") return MaskStrategy::kRegular;
  throw Error(ErrorCode::kInvalidParams, "unknown masking strategy '" + std::string(name) + "'");
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t RepetitionSeed(std::uint64_t seed, std::string_view utterance, std::uint64_t rep) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ Fnv1a64(utterance));
  return SplitMix64(h ^ rep);
}

std::size_t TargetSpanCount(std::size_t T, const RandomMaskParams& params) {
  double n = params.percent / 100.0 * static_cast<double>(T);
  if (!params.literal_start_fraction) n /= static_cast<double>(params.span);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n)));
}

MaskPlan PlanRandomMasks(std::size_t T, const RandomMaskParams& params, std::uint64_t seed,
                         std::string_view utterance) {
  CheckRandomParams(T, params);
  MaskPlan plan;
  plan.strategy = MaskStrategy::kRandom;
  plan.T = T;
  plan.random = params;
  plan.seed = seed;
  const std::size_t target = TargetSpanCount(T, params);
  const auto span = static_cast<std::size_t>(params.span);
  plan.repetitions.reserve(static_cast<std::size_t>(params.repetitions));
  for (int j = 0; j < params.repetitions; ++j) {
    plan.repetitions.push_back(
        SampleSpans(T, span, target, RepetitionSeed(seed, utterance, static_cast<std::uint64_t>(j))));
  }
  return plan;
}

MaskPlan PlanRegularMasks(std::size_t T, int slices) {
  if (T < 1) throw Error(ErrorCode::kInvalidParams, "T must be at least 1");
  if (slices < 1 || static_cast<std::size_t>(slices) > T) {
    throw Error(ErrorCode::kInvalidParams,
                "slices must be in [1, T] (got " + std::to_string(slices) + ", T = " + std::to_string(T) + ")");
  }
  MaskPlan plan;
  plan.strategy = MaskStrategy::kRegular;
  plan.T = T;
  plan.slices = slices;
  const auto k = static_cast<std::size_t>(slices);
  const std::size_t base = T / k;
  const std::size_t longer = T % k;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t len = base + (j < longer ? 1 : 0);
    IndexSet slice(len);
    std::iota(slice.begin(), slice.end(), begin);
    plan.repetitions.push_back(std::move(slice));
    begin += len;
  }
  return plan;
}

CoverageStats ComputeCoverage(const MaskPlan& plan) {
  CoverageStats stats;
  stats.per_frame_counts.assign(plan.T, 0);
  for (const IndexSet& rep : plan.repetitions) {
    for (std::size_t t : rep) ++stats.per_frame_counts.at(t);
  }
  stats.frames_covered = static_cast<std::size_t>(
      std::count_if(stats.per_frame_counts.begin(), stats.per_frame_counts.end(), [](std::size_t c) { return c > 0; }));
  return stats;
}

}  // namespace zsapa
