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

#include "zsapa/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zsapa/error.hpp"

namespace zsapa {

std::array<float, MockBackend::kFeatureDim> MockWindowFeatures(std::span<const float> window) {
  double sum = 0.0;
  double sum_sq = 0.0;
  float lo = window.front();
  float hi = window.front();
  std::size_t crossings = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const float x = window[i];
    sum += x;
    sum_sq += static_cast<double>(x) * x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    if (i > 0 && static_cast<double>(window[i - 1]) * x < 0.0) ++crossings;
  }
  const auto n = static_cast<double>(window.size());
  const float first = window.front();
  const float last = window.back();
  const double zcr = window.size() > 1 ? static_cast<double>(crossings) / (n - 1.0) : 0.0;
  return {static_cast<float>(sum / n),
          static_cast<float>(std::sqrt(sum_sq / n)),
          lo,
          hi,
          first,
          last,
          last - first,
          static_cast<float>(zcr)};
}

Matrix MockInterpolate(const Matrix& frames, std::span<const std::size_t> masked) {
  Matrix out = frames;
  if (masked.empty()) return out;
  const std::size_t T = frames.rows();
  std::vector<bool> is_masked(T, false);
  for (std::size_t m : masked) is_masked.at(m) = true;

  // Nearest unmasked row at or before / at or after each index; T means none.
  std::vector<std::size_t> left(T, T);
  std::vector<std::size_t> right(T, T);
  std::size_t last = T;
  for (std::size_t t = 0; t < T; ++t) {
    if (!is_masked[t]) last = t;
    left[t] = last;
  }
  last = T;
  for (std::size_t t = T; t-- > 0;) {
    if (!is_masked[t]) last = t;
    right[t] = last;
  }

  for (std::size_t t = 0; t < T; ++t) {
    if (!is_masked[t]) continue;
    auto dst = out.row(t);
    const std::size_t l = left[t];
    const std::size_t r = right[t];
    if (l == T && r == T) {
      std::fill(dst.begin(), dst.end(), 0.0f);
    } else if (l == T) {
      std::ranges::copy(frames.row(r), dst.begin());
    } else if (r == T) {
      std::ranges::copy(frames.row(l), dst.begin());
    } else {
      const auto wl = static_cast<double>(r - t);
      const auto wr = static_cast<double>(t - l);
      const auto span = static_cast<double>(r - l);
      const auto a = frames.row(l);
      const auto b = frames.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) {
        dst[c] = static_cast<float>((wl * a[c] + wr * b[c]) / span);
      }
    }
  }
  return out;
}

MockBackend::MockBackend() : mask_vector_(kFeatureDim, 0.0f) {
  metadata_.format_version = 1;
  metadata_.sample_rate = kTargetSampleRate;
  metadata_.frame_hop_samples = kWindow;
  metadata_.receptive_field_samples = kWindow;
  metadata_.feature_dim = kFeatureDim;
  metadata_.hidden_dim = kFeatureDim;
  metadata_.num_layers = kNumLayers;
  codebooks_.reserve(kNumLayers);
  for (int layer = 1; layer <= kNumLayers; ++layer) codebooks_.push_back(MakeCodebook(layer));
}

Codebook MockBackend::MakeCodebook(int layer) {
  Matrix centroids(kClusters, kFeatureDim, 0.0f);
  for (int i = 0; i < kClusters; ++i) {
    centroids(static_cast<std::size_t>(i), 0) = -1.0f + static_cast<float>(2 * i + 1) / kClusters;
  }
  return Codebook{std::move(centroids), layer};
}

FrameSequence MockBackend::EncodeFrames(const AudioClip& clip) {
  if (clip.sample_rate != metadata_.sample_rate) {
    throw Error(ErrorCode::kInvalidParams, "clip sample rate " + std::to_string(clip.sample_rate) +
                                               " does not match bundle rate 16000");
  }
  const std::size_t T = metadata_.FrameCount(clip.samples.size());
  if (T == 0) {
    throw Error(ErrorCode::kAudioTooShort, std::to_string(clip.samples.size()) + " samples, need at least " +
                                               std::to_string(kWindow));
  }
  FrameSequence seq;
  seq.source_id = clip.source_id;
  seq.frames = Matrix(T, kFeatureDim);
  const std::span<const float> samples(clip.samples);
  for (std::size_t t = 0; t < T; ++t) {
    const auto f = MockWindowFeatures(samples.subspan(t * kWindow, kWindow));
    std::ranges::copy(f, seq.frames.row(t).begin());
  }
  return seq;
}

LayerFeatures MockBackend::Contextualize(const FrameSequence& frames, std::span<const std::size_t> masked,
                                         int layer) {
  CheckLayer(layer);
  CheckMasked(frames, masked);
  return LayerFeatures{layer, MockInterpolate(frames.frames, masked)};
}

const Codebook& MockBackend::CodebookFor(int layer) const {
  CheckLayer(layer);
  return codebooks_[static_cast<std::size_t>(layer - 1)];
}

}  // namespace zsapa
