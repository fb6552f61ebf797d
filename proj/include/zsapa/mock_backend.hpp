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

#ifndef ZSAPA_MOCK_BACKEND_HPP_
#define ZSAPA_MOCK_BACKEND_HPP_

#include <array>
#include <span>
#include <vector>

#include "zsapa/backend.hpp"

namespace zsapa {

/// Closed-form stand-in for the neural backend.
///
/// Each frame summarises one non-overlapping 320-sample window as
/// [mean, rms, min, max, first, last, last - first, zero-crossing rate].
/// "Contextualizing" keeps unmasked rows and fills each masked row by linear
/// interpolation between the nearest unmasked rows (copying the nearest one
/// at the edges, zeros if everything is masked). The layer is validated but
/// otherwise ignored. Every layer shares one 16-entry codebook whose
/// centroid i sits at mean amplitude -1 + (2i + 1) / 16, so tokens bin
/// frames by window mean.
///
/// Smooth signals are recovered exactly; rapidly varying ones are not.
class MockBackend final : public Backend {
 public:
  static constexpr int kFeatureDim = 8;
  static constexpr int kWindow = 320;
  static constexpr int kClusters = 16;
  static constexpr int kNumLayers = 12;

  MockBackend();

  const BundleMetadata& metadata() const override { return metadata_; }
  FrameSequence EncodeFrames(const AudioClip& clip) override;
  LayerFeatures Contextualize(const FrameSequence& frames, std::span<const std::size_t> masked,
                              int layer) override;
  const Codebook& CodebookFor(int layer) const override;

  std::span<const float> mask_vector() const { return mask_vector_; }

  static Codebook MakeCodebook(int layer);

 private:
  BundleMetadata metadata_;
  std::vector<float> mask_vector_;
  std::vector<Codebook> codebooks_;  // index layer - 1
};

/// Frame features of one window, as used by MockBackend::EncodeFrames.
std::array<float, MockBackend::kFeatureDim> MockWindowFeatures(std::span<const float> window);

/// Interpolation rule of MockBackend::Contextualize applied to a matrix.
Matrix MockInterpolate(const Matrix& frames, std::span<const std::size_t> masked);

}  // namespace zsapa

#endif  // ZSAPA_MOCK_BACKEND_HPP_
