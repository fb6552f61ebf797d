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

#ifndef ZSAPA_BACKEND_HPP_
#define ZSAPA_BACKEND_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "zsapa/audio.hpp"
#include "zsapa/features.hpp"
#include "zsapa/matrix.hpp"
#include "zsapa/quantizer.hpp"

namespace zsapa {

/// Contents of a bundle's metadata.json.
struct BundleMetadata {
  int format_version = 1;
  int sample_rate = kTargetSampleRate;
  int frame_hop_samples = 320;
  int receptive_field_samples = 400;
  int feature_dim = 768;
  int hidden_dim = 768;  // optional in the file; defaults to feature_dim
  int num_layers = 12;
  std::map<int, std::string> codebook_files;  // layer (1-based) -> file name

  /// 1 + floor((samples - receptive_field) / hop), or 0 when the clip is
  /// shorter than one receptive field.
  std::size_t FrameCount(std::size_t samples) const;
};

/// Acoustic backend contract: waveform -> frames, and frames with an optional
/// masked index set -> per-layer hidden states. Instances are not required to
/// be usable from several threads at once; use one per worker.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BundleMetadata& metadata() const = 0;

  /// Throws Error{kAudioTooShort} when the clip yields no frame and
  /// Error{kInvalidParams} on a sample-rate mismatch.
  virtual FrameSequence EncodeFrames(const AudioClip& clip) = 0;

  /// Hidden states of `layer` for X with every index in `masked` replaced by
  /// the mask embedding. An empty set gives the clean pass.
  virtual LayerFeatures Contextualize(const FrameSequence& frames, std::span<const std::size_t> masked,
                                      int layer) = 0;

  /// One result per mask set, identical to calling Contextualize for each.
  virtual std::vector<LayerFeatures> ContextualizeBatch(const FrameSequence& frames,
                                                        std::span<const IndexSet> masks, int layer);

  /// Codebook matching `layer`; throws Error{kLayerOutOfRange} when the
  /// bundle has none for it.
  virtual const Codebook& CodebookFor(int layer) const = 0;

 protected:
  void CheckLayer(int layer) const;
  void CheckMasked(const FrameSequence& frames, std::span<const std::size_t> masked) const;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

/// A bundle directory: metadata.json, encoder.onnx, mask.f32 and one
/// codebook_L<layer>.kmcb per exported layer.
struct ModelBundle {
  std::filesystem::path directory;
  BundleMetadata metadata;
  std::vector<float> mask_vector;
  std::map<int, Codebook> codebooks;

  std::filesystem::path GraphPath() const { return directory / "encoder.onnx"; }
};

BundleMetadata ParseBundleMetadata(const std::string& json_text);
std::string SerializeBundleMetadata(const BundleMetadata& metadata);

/// Reads and validates a bundle directory. Hard violations (rate, mask length,
/// codebook layers, missing files, dimension mismatches) throw
/// Error{kInvalidBundle | kDimensionMismatch | ...}.
ModelBundle LoadBundle(const std::filesystem::path& directory);

/// Soft findings about an already-loaded bundle, such as no codebook for the
/// default layer. An exported bundle is expected to produce none.
std::vector<std::string> BundleWarnings(const ModelBundle& bundle);

std::vector<float> ReadMaskVector(const std::filesystem::path& path);
void WriteMaskVector(const std::filesystem::path& path, std::span<const float> values);

}  // namespace zsapa

#endif  // ZSAPA_BACKEND_HPP_
