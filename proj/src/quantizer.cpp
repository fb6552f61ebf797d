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

#include "zsapa/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "zsapa/error.hpp"

namespace zsapa {

namespace {

constexpr char kMagic[4] = {'K', 'M', 'C', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 20;

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void CheckCompatible(const LayerFeatures& features, const Codebook& codebook) {
  if (features.features.cols() != codebook.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "features have " + std::to_string(features.features.cols()) + " dims, codebook " +
                    std::to_string(codebook.dim()));
  }
  if (features.layer != codebook.layer) {
    throw Error(ErrorCode::kLayerMismatch, "features from layer " + std::to_string(features.layer) +
                                               ", codebook fitted on layer " +
                                               std::to_string(codebook.layer));
  }
}

}  // namespace

void ValidateCodebook(const Codebook& codebook) {
  const Matrix& c = codebook.centroids;
  if (c.rows() < 2) throw Error(ErrorCode::kInvalidParams, "codebook needs at least 2 centroids");
  if (c.cols() == 0) throw Error(ErrorCode::kInvalidParams, "codebook has zero dimension");
  for (float v : c.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidParams, "codebook has non-finite entries");
  }
  for (std::size_t i = 0; i < c.rows(); ++i) {
    for (std::size_t j = i + 1; j < c.rows(); ++j) {
      if (std::ranges::equal(c.row(i), c.row(j))) {
        throw Error(ErrorCode::kInvalidParams,
                    "centroids " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
}

Codebook ParseCodebook(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "expected KMCB header");
  }
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::kTruncatedFile, "header incomplete");
  const std::uint32_t version = ReadU32(bytes.data() + 4);
  if (version != kVersion) {
    throw Error(ErrorCode::kBadMagic, "unsupported KMCB version " + std::to_string(version));
  }
  const std::uint64_t n_clusters = ReadU32(bytes.data() + 8);
  const std::uint64_t dim = ReadU32(bytes.data() + 12);
  const std::uint32_t layer = ReadU32(bytes.data() + 16);
  const std::uint64_t count = n_clusters * dim;
  if (bytes.size() - kHeaderBytes < count * 4) {
    throw Error(ErrorCode::kTruncatedFile, "header promises " + std::to_string(count) + " values, file holds " +
                                               std::to_string((bytes.size() - kHeaderBytes) / 4));
  }
  std::vector<float> values(count);
  const unsigned char* p = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(ReadU32(p + 4 * i));
  Codebook cb{Matrix(n_clusters, dim, std::move(values)), static_cast<int>(layer)};
  ValidateCodebook(cb);
  return cb;
}

std::vector<unsigned char> SerializeCodebook(const Codebook& codebook) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + codebook.centroids.data().size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU32(out, kVersion);
  PutU32(out, static_cast<std::uint32_t>(codebook.size()));
  PutU32(out, static_cast<std::uint32_t>(codebook.dim()));
  PutU32(out, static_cast<std::uint32_t>(codebook.layer));
  for (float v : codebook.centroids.data()) PutU32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Codebook ReadCodebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return ParseCodebook(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void WriteCodebook(const std::filesystem::path& path, const Codebook& codebook) {
  const auto bytes = SerializeCodebook(codebook);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Codebook LoadCodebook(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  Codebook cb = ReadCodebook(path);
  if (expected_dim && cb.dim() != *expected_dim) {
    throw Error(ErrorCode::kDimensionMismatch, path.string() + ": codebook dim " + std::to_string(cb.dim()) +
                                                   ", bundle expects " + std::to_string(*expected_dim));
  }
  return cb;
}

double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

Token NearestCentroid(std::span<const float> frame, const Matrix& centroids) {
  Token best = 0;
  double best_d = SquaredDistance(frame, centroids.row(0));
  for (std::size_t c = 1; c < centroids.rows(); ++c) {
    const double d = SquaredDistance(frame, centroids.row(c));
    if (d < best_d) {  // strict: equal distance keeps the lower index
      best_d = d;
      best = static_cast<Token>(c);
    }
  }
  return best;
}

TokenSequence Tokenize(const LayerFeatures& features, const Codebook& codebook) {
  CheckCompatible(features, codebook);
  TokenSequence out;
  out.tokens.resize(features.T());
  const auto rows = static_cast<std::ptrdiff_t>(features.T());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < rows; ++t) {
    const auto r = static_cast<std::size_t>(t);
    out.tokens[r] = NearestCentroid(features.features.row(r), codebook.centroids);
  }
  return out;
}

TokenSequence TokenizeSerial(const LayerFeatures& features, const Codebook& codebook) {
  CheckCompatible(features, codebook);
  TokenSequence out;
  out.tokens.reserve(features.T());
  for (std::size_t t = 0; t < features.T(); ++t) {
    out.tokens.push_back(NearestCentroid(features.features.row(t), codebook.centroids));
  }
  return out;
}

TokenSequence TokenizeRows(const LayerFeatures& features, const Codebook& codebook,
                           std::span<const std::size_t> rows) {
  CheckCompatible(features, codebook);
  TokenSequence out;
  out.tokens.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= features.T()) {
      throw Error(ErrorCode::kLengthMismatch, "row " + std::to_string(r) + " outside " +
                                                  std::to_string(features.T()) + " frames");
    }
    out.tokens.push_back(NearestCentroid(features.features.row(r), codebook.centroids));
  }
  out.positions = IndexSet(rows.begin(), rows.end());
  return out;
}

}  // namespace zsapa
