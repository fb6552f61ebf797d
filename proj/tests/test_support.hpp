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

// Shared fixtures and independent oracles for the test binaries. Nothing in
// here calls into the code paths it is used to check.

#ifndef ZSAPA_TESTS_TEST_SUPPORT_HPP_
#define ZSAPA_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "zsapa/audio.hpp"
#include "zsapa/harness.hpp"
#include "zsapa/matrix.hpp"
#include "zsapa/quantizer.hpp"

namespace zsapa::testing {

inline constexpr std::size_t kMockWindow = 320;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("zsapa_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Clip whose t-th 320-sample window is the constant `means[t]`; the mock
/// encoder then reports exactly `means[t]` as the frame mean.
inline AudioClip ClipFromWindowMeans(const std::vector<float>& means, const std::string& id = "clip") {
  AudioClip clip;
  clip.source_id = id;
  clip.samples.reserve(means.size() * kMockWindow);
  for (float m : means) clip.samples.insert(clip.samples.end(), kMockWindow, m);
  return clip;
}

inline AudioClip ConstantClip(float value, std::size_t windows, const std::string& id = "constant") {
  return ClipFromWindowMeans(std::vector<float>(windows, value), id);
}

/// Slow sinusoid of window means: every masked frame is recovered to within a
/// small fraction of a mock-codebook bin.
inline std::vector<float> SmoothMeans(std::size_t windows) {
  std::vector<float> m(windows);
  for (std::size_t t = 0; t < windows; ++t) {
    m[t] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 80.0));
  }
  return m;
}

/// Slow sinusoid plus `roughness`-scaled uniform jitter per window. Full
/// roughness is one mock-codebook bin (2/16) of jitter: wider jitter makes
/// every masked frame a mismatch and the mock stops telling clips apart.
inline constexpr double kMockBinWidth = 2.0 / 16.0;

inline std::vector<float> RoughMeans(std::size_t windows, double roughness, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<float> m = SmoothMeans(windows);
  for (auto& v : m) {
    const double jitter = (static_cast<double>(rng()) / 4294967295.0) * 2.0 - 1.0;
    v = static_cast<float>(std::clamp(0.4 * v + kMockBinWidth * roughness * jitter, -0.95, 0.95));
  }
  return m;
}

/// Writes `n` utterances with roughness i/(n-1) and human scores that
/// decrease linearly with roughness; returns the manifest entries.
inline std::vector<ManifestEntry> WriteRoughnessManifest(const std::filesystem::path& dir, std::size_t n,
                                                         std::size_t windows = 100) {
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%03zu", i);
    const AudioClip clip = ClipFromWindowMeans(RoughMeans(windows, r, 1000 + static_cast<std::uint32_t>(i)), id);
    const auto wav = dir / (std::string(id) + ".wav");
    WriteWav(wav, clip.samples, kTargetSampleRate, 1, WavEncoding::kFloat32);
    entries.push_back({id, wav, 10.0 - 8.0 * r});
  }
  return entries;
}

// ---- oracles ---------------------------------------------------------------

/// Exhaustive nearest-centroid scan written from the definition: smallest
/// squared distance, lowest index among equals. Distances in long double.
inline std::vector<Token> BruteForceTokens(const Matrix& frames, const Matrix& centroids) {
  std::vector<Token> out;
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    std::vector<long double> d(centroids.rows());
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      long double acc = 0;
      for (std::size_t k = 0; k < frames.cols(); ++k) {
        const long double diff = static_cast<long double>(frames(t, k)) - centroids(c, k);
        acc += diff * diff;
      }
      d[c] = acc;
    }
    long double best = std::numeric_limits<long double>::infinity();
    for (long double v : d) best = std::min(best, v);
    for (std::size_t c = 0; c < d.size(); ++c) {
      if (d[c] == best) {
        out.push_back(static_cast<Token>(c));
        break;
      }
    }
  }
  return out;
}

/// Sum over repetitions j and i in M_j of [z_i != z*_i], kept as an integer
/// numerator over k.
struct Rational {
  std::size_t numerator = 0;
  std::size_t denominator = 1;
};

inline Rational BruteForceAmrt(const std::vector<Token>& reference, const std::vector<std::vector<std::size_t>>& masks,
                               const std::vector<std::vector<Token>>& full_recovered) {
  Rational r{0, masks.size()};
  for (std::size_t j = 0; j < masks.size(); ++j) {
    for (std::size_t i : masks[j]) r.numerator += reference[i] != full_recovered[j][i] ? 1 : 0;
  }
  return r;
}

/// Pearson correlation straight from the covariance definition, in long
/// double with a single pass over centred products.
inline long double DirectPearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0;
  long double my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double cxy = 0;
  long double cxx = 0;
  long double cyy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cxy += (x[i] - mx) * (y[i] - my);
    cxx += (x[i] - mx) * (x[i] - mx);
    cyy += (y[i] - my) * (y[i] - my);
  }
  return cxy / std::sqrt(cxx * cyy);
}

/// Independent simulation of the random span sampler: draw starts uniformly
/// without replacement from [0, T - l], keep those whose span is free, stop at
/// `target` spans. Uses its own RNG stream.
inline std::vector<bool> SimulateSpanMask(std::size_t T, std::size_t l, std::size_t target, std::mt19937& rng) {
  std::vector<bool> taken(T, false);
  if (T < l) return std::vector<bool>(T, true);
  std::vector<std::size_t> pool(T - l + 1);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  std::size_t accepted = 0;
  while (!pool.empty() && accepted < target) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t idx = pick(rng);
    const std::size_t s = pool[idx];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
    bool free = true;
    for (std::size_t t = s; t < s + l; ++t) free = free && !taken[t];
    if (!free) continue;
    for (std::size_t t = s; t < s + l; ++t) taken[t] = true;
    ++accepted;
  }
  return taken;
}

}  // namespace zsapa::testing

#endif  // ZSAPA_TESTS_TEST_SUPPORT_HPP_
