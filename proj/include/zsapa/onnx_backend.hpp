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

#ifndef ZSAPA_ONNX_BACKEND_HPP_
#define ZSAPA_ONNX_BACKEND_HPP_

#include <memory>
#include <optional>
#include <string>

#include "zsapa/backend.hpp"

namespace zsapa {

// Graph contract of encoder.onnx:
//   inputs  waveform      float32 [B, S]
//           frame_mask    bool    [B, T]   true = replace frame by the mask embedding
//   outputs frames        float32 [B, T, feature_dim]           (post-projection, clean)
//           hidden_states float32 [num_layers, B, T, hidden_dim] (block outputs, 1-based layer l at index l-1)
inline constexpr const char* kGraphWaveformInput = "waveform";
inline constexpr const char* kGraphMaskInput = "frame_mask";
inline constexpr const char* kGraphFramesOutput = "frames";
inline constexpr const char* kGraphHiddenOutput = "hidden_states";

struct OnnxOptions {
  int intra_op_threads = 1;
  int max_batch = 8;  // repetitions per graph call
  // ONNX Runtime shared library, used exclusively when set. Otherwise
  // $ZS_APA_ONNXRUNTIME, then the library found at configure time, then the
  // loader search path. The first library loaded serves the whole process.
  std::optional<std::string> runtime_library;
};

/// True when an ONNX Runtime library can be loaded; `why` receives the
/// loader error otherwise.
bool OnnxRuntimeAvailable(std::string* why = nullptr, const OnnxOptions& options = {});

/// Backend that runs a bundle's encoder.onnx through ONNX Runtime.
class OnnxBackend final : public Backend {
 public:
  OnnxBackend(std::shared_ptr<const ModelBundle> bundle, OnnxOptions options = {});
  ~OnnxBackend() override;
  OnnxBackend(const OnnxBackend&) = delete;
  OnnxBackend& operator=(const OnnxBackend&) = delete;

  const BundleMetadata& metadata() const override { return bundle_->metadata; }
  FrameSequence EncodeFrames(const AudioClip& clip) override;
  LayerFeatures Contextualize(const FrameSequence& frames, std::span<const std::size_t> masked,
                              int layer) override;
  std::vector<LayerFeatures> ContextualizeBatch(const FrameSequence& frames, std::span<const IndexSet> masks,
                                                int layer) override;
  const Codebook& CodebookFor(int layer) const override;

 private:
  class Session;

  std::shared_ptr<const ModelBundle> bundle_;
  OnnxOptions options_;
  std::unique_ptr<Session> session_;
};

BackendFactory MakeOnnxBackendFactory(std::shared_ptr<const ModelBundle> bundle, OnnxOptions options = {});

}  // namespace zsapa

#endif  // ZSAPA_ONNX_BACKEND_HPP_
