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

#ifndef ZSAPA_QUANTIZER_HPP_
#define ZSAPA_QUANTIZER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "zsapa/features.hpp"
#include "zsapa/matrix.hpp"

namespace zsapa {

using Token = std::uint32_t;

/// k-means centroids for the features of one Transformer layer.
/// Invariants: at least two rows, rows distinct, all entries finite.
struct Codebook {
  Matrix centroids;  // C x dim
  int layer = 0;

  std::size_t size() const noexcept { return centroids.rows(); }
  std::size_t dim() const noexcept { return centroids.cols(); }
};

/// Acoustic-unit tokens. When `positions` is set the tokens belong to those
/// frame indices only (the recovered tokens of one masked repetition).
struct TokenSequence {
  std::vector<Token> tokens;
  std::optional<IndexSet> positions;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Checks the codebook invariants; throws Error{kInvalidParams}.
void ValidateCodebook(const Codebook& codebook);

// KMCB layout: "KMCB", u32 version = 1, u32 n_clusters, u32 dim, u32 layer,
// then n_clusters * dim float32 values, row-major. All little-endian.
Codebook ReadCodebook(const std::filesystem::path& path);
Codebook ParseCodebook(std::span<const unsigned char> bytes);
std::vector<unsigned char> SerializeCodebook(const Codebook& codebook);
void WriteCodebook(const std::filesystem::path& path, const Codebook& codebook);

/// Loads a codebook and checks it against the expected feature dimension
/// (Error{kDimensionMismatch}).
Codebook LoadCodebook(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = {});

/// Squared Euclidean distance accumulated in double precision.
double SquaredDistance(std::span<const float> a, std::span<const float> b);

/// Index of the nearest centroid; ties go to the lowest index.
Token NearestCentroid(std::span<const float> frame, const Matrix& centroids);

/// Nearest-centroid token for every frame, parallel over frames.
/// Throws Error{kDimensionMismatch | kLayerMismatch}.
TokenSequence Tokenize(const LayerFeatures& features, const Codebook& codebook);

/// Serial reference for Tokenize.
TokenSequence TokenizeSerial(const LayerFeatures& features, const Codebook& codebook);

/// Tokens for the given rows only; the result records them as positions.
TokenSequence TokenizeRows(const LayerFeatures& features, const Codebook& codebook,
                           std::span<const std::size_t> rows);

}  // namespace zsapa

#endif  // ZSAPA_QUANTIZER_HPP_
