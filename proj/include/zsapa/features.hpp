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

#ifndef ZSAPA_FEATURES_HPP_
#define ZSAPA_FEATURES_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "zsapa/matrix.hpp"

namespace zsapa {

/// Encoder output X: T frames of feature_dim values, plus the waveform it was
/// computed from (graph backends re-run the encoder for every masked pass).
struct FrameSequence {
  Matrix frames;
  std::string source_id;
  std::shared_ptr<const std::vector<float>> waveform;

  std::size_t T() const noexcept { return frames.rows(); }
};

/// Hidden states of one Transformer layer (1-based) for every frame.
struct LayerFeatures {
  int layer = 0;
  Matrix features;

  std::size_t T() const noexcept { return features.rows(); }
};

using IndexSet = std::vector<std::size_t>;

}  // namespace zsapa

#endif  // ZSAPA_FEATURES_HPP_
