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

#include "zsapa/onnx_backend.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

#include "ort_api.hpp"
#include "zsapa/error.hpp"

namespace zsapa {

namespace {

struct Runtime {
  const ort::OrtApi* api = nullptr;
  ort::OrtEnv* env = nullptr;
  std::string library;
  std::string version;
};

std::vector<std::string> CandidateLibraries(const OnnxOptions& options) {
  // An explicit library is the only candidate; silently falling back would
  // hide a misconfiguration.
  if (options.runtime_library) return {*options.runtime_library};
  std::vector<std::string> out;
  if (const char* env = std::getenv("ZS_APA_ONNXRUNTIME"); env != nullptr && *env != '\0') out.emplace_back(env);
#ifdef ZSAPA_DEFAULT_ORT_LIBRARY
  out.emplace_back(ZSAPA_DEFAULT_ORT_LIBRARY);
#endif
  out.emplace_back("libonnxruntime.so");
  out.emplace_back("libonnxruntime.so.1");
  return out;
}

// The runtime is loaded once per process and never unloaded; the env is
// shared by every session.
const Runtime& LoadRuntime(const OnnxOptions& options) {
  static std::mutex mu;
  static Runtime* runtime = nullptr;
  std::lock_guard lock(mu);
  if (runtime != nullptr) {
    if (options.runtime_library && *options.runtime_library != runtime->library) {
      throw Error(ErrorCode::kGraphExecutionFailure, "ONNX Runtime already loaded from " + runtime->library +
                                                         "; cannot switch to " + *options.runtime_library);
    }
    return *runtime;
  }

  std::string errors;
  for (const std::string& lib : CandidateLibraries(options)) {
    void* handle = dlopen(lib.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (handle == nullptr) {
      const char* err = dlerror();
      errors += "\n  " + lib + ": " + (err != nullptr ? err : "unknown error");
      continue;
    }
    auto get_base = reinterpret_cast<ort::GetApiBaseFn>(dlsym(handle, "OrtGetApiBase"));
    if (get_base == nullptr) {
      errors += "\n  " + lib + ": no OrtGetApiBase symbol";
      dlclose(handle);
      continue;
    }
    const ort::OrtApiBase* base = get_base();
    const ort::OrtApi* api = nullptr;
    for (std::uint32_t v = ort::kApiVersion; v >= 1 && api == nullptr; --v) api = base->GetApi(v);
    if (api == nullptr) {
      errors += "\n  " + lib + ": no compatible API version";
      dlclose(handle);
      continue;
    }
    ort::OrtEnv* env = nullptr;
    if (ort::OrtStatus* st = api->CreateEnv(ort::kLoggingLevelWarning, "zs-apa", &env); st != nullptr) {
      errors += "\n  " + lib + ": " + api->GetErrorMessage(st);
      api->ReleaseStatus(st);
      continue;
    }
    runtime = new Runtime{api, env, lib, base->GetVersionString()};
    return *runtime;
  }
  throw Error(ErrorCode::kGraphExecutionFailure, "cannot load ONNX Runtime:" + errors);
}

void Check(const ort::OrtApi* api, ort::OrtStatus* status, const char* what) {
  if (status == nullptr) return;
  std::string msg = std::string(what) + ": " + api->GetErrorMessage(status);
  api->ReleaseStatus(status);
  throw Error(ErrorCode::kGraphExecutionFailure, msg);
}

}  // namespace

bool OnnxRuntimeAvailable(std::string* why, const OnnxOptions& options) {
  try {
    LoadRuntime(options);
    return true;
  } catch (const Error& e) {
    if (why != nullptr) *why = e.what();
    return false;
  }
}

class OnnxBackend::Session {
 public:
  struct Tensor {
    std::vector<std::int64_t> shape;
    const float* data = nullptr;
  };

  // Owns the OrtValues produced by one Run call.
  class Outputs {
   public:
    Outputs(const ort::OrtApi* api, std::size_t n) : api_(api), values_(n, nullptr) {}
    ~Outputs() {
      for (ort::OrtValue* v : values_) {
        if (v != nullptr) api_->ReleaseValue(v);
      }
    }
    Outputs(const Outputs&) = delete;
    Outputs& operator=(const Outputs&) = delete;

    ort::OrtValue** raw() { return values_.data(); }

    Tensor Get(std::size_t i) const {
      Tensor t;
      ort::OrtTensorTypeAndShapeInfo* info = nullptr;
      Check(api_, api_->GetTensorTypeAndShape(values_[i], &info), "GetTensorTypeAndShape");
      int type = 0;
      std::size_t rank = 0;
      ort::OrtStatus* st = api_->GetTensorElementType(info, &type);
      if (st == nullptr) st = api_->GetDimensionsCount(info, &rank);
      if (st == nullptr) {
        t.shape.resize(rank);
        st = api_->GetDimensions(info, t.shape.data(), rank);
      }
      api_->ReleaseTensorTypeAndShapeInfo(info);
      Check(api_, st, "tensor shape query");
      if (type != ort::kElementFloat) throw Error(ErrorCode::kGraphExecutionFailure, "graph output is not float32");
      void* data = nullptr;
      Check(api_, api_->GetTensorMutableData(values_[i], &data), "GetTensorMutableData");
      t.data = static_cast<const float*>(data);
      return t;
    }

   private:
    const ort::OrtApi* api_;
    std::vector<ort::OrtValue*> values_;
  };

  Session(const std::filesystem::path& graph, const OnnxOptions& options)
      : rt_(LoadRuntime(options)), api_(rt_.api) {
    ort::OrtSessionOptions* so = nullptr;
    Check(api_, api_->CreateSessionOptions(&so), "CreateSessionOptions");
    ort::OrtStatus* st = api_->SetIntraOpNumThreads(so, std::max(1, options.intra_op_threads));
    if (st == nullptr) st = api_->SetInterOpNumThreads(so, 1);
    if (st == nullptr) st = api_->SetSessionGraphOptimizationLevel(so, ort::kEnableAllOptimizations);
    if (st == nullptr) st = api_->CreateSession(rt_.env, graph.c_str(), so, &session_);
    api_->ReleaseSessionOptions(so);
    Check(api_, st, ("loading " + graph.string()).c_str());
    Check(api_, api_->CreateCpuMemoryInfo(ort::kArenaAllocator, ort::kMemTypeDefault, &memory_), "CreateCpuMemoryInfo");

    const auto names = [&](bool inputs) {
      std::size_t n = 0;
      Check(api_, inputs ? api_->SessionGetInputCount(session_, &n) : api_->SessionGetOutputCount(session_, &n),
            "io count");
      ort::OrtAllocator* alloc = nullptr;
      Check(api_, api_->GetAllocatorWithDefaultOptions(&alloc), "GetAllocatorWithDefaultOptions");
      std::vector<std::string> out;
      for (std::size_t i = 0; i < n; ++i) {
        char* name = nullptr;
        Check(api_, inputs ? api_->SessionGetInputName(session_, i, alloc, &name)
                           : api_->SessionGetOutputName(session_, i, alloc, &name),
              "io name");
        out.emplace_back(name);
        api_->AllocatorFree(alloc, name);
      }
      return out;
    };
    const auto require = [&](const std::vector<std::string>& have, const char* name, const char* kind) {
      if (std::ranges::find(have, name) == have.end()) {
        throw Error(ErrorCode::kInvalidBundle, graph.string() + ": graph has no " + kind + " '" + name + "'");
      }
    };
    const auto inputs = names(true);
    const auto outputs = names(false);
    require(inputs, kGraphWaveformInput, "input");
    require(inputs, kGraphMaskInput, "input");
    require(outputs, kGraphFramesOutput, "output");
    require(outputs, kGraphHiddenOutput, "output");
  }

  ~Session() {
    if (memory_ != nullptr) api_->ReleaseMemoryInfo(memory_);
    if (session_ != nullptr) api_->ReleaseSession(session_);
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // waveform: B x S row-major, mask: B x T row-major (0/1 bytes).
  std::unique_ptr<Outputs> Run(std::vector<float>& waveform, std::int64_t batch, std::vector<unsigned char>& mask,
                               std::int64_t frames, std::span<const char* const> output_names) {
    const std::int64_t samples = static_cast<std::int64_t>(waveform.size()) / batch;
    const std::int64_t wav_shape[2] = {batch, samples};
    const std::int64_t mask_shape[2] = {batch, frames};
    ort::OrtValue* inputs[2] = {nullptr, nullptr};
    const auto release_inputs = [&] {
      for (ort::OrtValue*& v : inputs) {
        if (v != nullptr) api_->ReleaseValue(v);
        v = nullptr;
      }
    };
    ort::OrtStatus* st = api_->CreateTensorWithDataAsOrtValue(memory_, waveform.data(), waveform.size() * sizeof(float),
                                                              wav_shape, 2, ort::kElementFloat, &inputs[0]);
    if (st == nullptr) {
      st = api_->CreateTensorWithDataAsOrtValue(memory_, mask.data(), mask.size(), mask_shape, 2, ort::kElementBool,
                                                &inputs[1]);
    }
    if (st != nullptr) {
      release_inputs();
      Check(api_, st, "creating input tensors");
    }
    const char* input_names[2] = {kGraphWaveformInput, kGraphMaskInput};
    auto outputs = std::make_unique<Outputs>(api_, output_names.size());
    st = api_->Run(session_, nullptr, input_names, inputs, 2, output_names.data(), output_names.size(), outputs->raw());
    release_inputs();
    Check(api_, st, "graph execution");
    return outputs;
  }

 private:
  const Runtime& rt_;
  const ort::OrtApi* api_;
  ort::OrtSession* session_ = nullptr;
  ort::OrtMemoryInfo* memory_ = nullptr;
};

OnnxBackend::OnnxBackend(std::shared_ptr<const ModelBundle> bundle, OnnxOptions options)
    : bundle_(std::move(bundle)), options_(std::move(options)) {
  if (!bundle_) throw Error(ErrorCode::kInvalidBundle, "null bundle");
  options_.max_batch = std::max(1, options_.max_batch);
  session_ = std::make_unique<Session>(bundle_->GraphPath(), options_);
}

OnnxBackend::~OnnxBackend() = default;

FrameSequence OnnxBackend::EncodeFrames(const AudioClip& clip) {
  const BundleMetadata& md = metadata();
  if (clip.sample_rate != md.sample_rate) {
    throw Error(ErrorCode::kInvalidParams, "clip sample rate " + std::to_string(clip.sample_rate) +
                                               " does not match bundle rate " + std::to_string(md.sample_rate));
  }
  const std::size_t T = md.FrameCount(clip.samples.size());
  if (T == 0) {
    throw Error(ErrorCode::kAudioTooShort, std::to_string(clip.samples.size()) + " samples, receptive field is " +
                                               std::to_string(md.receptive_field_samples));
  }
  std::vector<float> wav = clip.samples;
  std::vector<unsigned char> mask(T, 0);
  const char* names[1] = {kGraphFramesOutput};
  const auto out = session_->Run(wav, 1, mask, static_cast<std::int64_t>(T), names);
  const Session::Tensor frames = out->Get(0);
  const auto D = static_cast<std::int64_t>(md.feature_dim);
  if (frames.shape != std::vector<std::int64_t>{1, static_cast<std::int64_t>(T), D}) {
    throw Error(ErrorCode::kGraphExecutionFailure,
                "frames output shape disagrees with metadata (expected [1, " + std::to_string(T) + ", " +
                    std::to_string(D) + "])");
  }
  FrameSequence seq;
  seq.source_id = clip.source_id;
  seq.frames = Matrix(T, static_cast<std::size_t>(D), std::vector<float>(frames.data, frames.data + T * D));
  seq.waveform = std::make_shared<const std::vector<float>>(clip.samples);
  return seq;
}

LayerFeatures OnnxBackend::Contextualize(const FrameSequence& frames, std::span<const std::size_t> masked,
                                         int layer) {
  const IndexSet one(masked.begin(), masked.end());
  return std::move(ContextualizeBatch(frames, std::span<const IndexSet>(&one, 1), layer).front());
}

std::vector<LayerFeatures> OnnxBackend::ContextualizeBatch(const FrameSequence& frames,
                                                           std::span<const IndexSet> masks, int layer) {
  CheckLayer(layer);
  if (!frames.waveform) {
    throw Error(ErrorCode::kInvalidParams, "frame sequence was not produced by a graph backend");
  }
  for (const IndexSet& m : masks) CheckMasked(frames, m);

  const BundleMetadata& md = metadata();
  const std::size_t T = frames.T();
  const std::size_t S = frames.waveform->size();
  const auto H = static_cast<std::size_t>(md.hidden_dim);
  const auto L = static_cast<std::size_t>(md.num_layers);
  std::vector<LayerFeatures> out;
  out.reserve(masks.size());

  const auto max_batch = static_cast<std::size_t>(options_.max_batch);
  for (std::size_t first = 0; first < masks.size(); first += max_batch) {
    const std::size_t B = std::min(max_batch, masks.size() - first);
    std::vector<float> wav(B * S);
    std::vector<unsigned char> mask(B * T, 0);
    for (std::size_t b = 0; b < B; ++b) {
      std::ranges::copy(*frames.waveform, wav.begin() + static_cast<std::ptrdiff_t>(b * S));
      for (std::size_t m : masks[first + b]) mask[b * T + m] = 1;
    }
    const char* names[1] = {kGraphHiddenOutput};
    const auto res = session_->Run(wav, static_cast<std::int64_t>(B), mask, static_cast<std::int64_t>(T), names);
    const Session::Tensor hidden = res->Get(0);
    const std::vector<std::int64_t> expected{static_cast<std::int64_t>(L), static_cast<std::int64_t>(B),
                                             static_cast<std::int64_t>(T), static_cast<std::int64_t>(H)};
    if (hidden.shape != expected) {
      throw Error(ErrorCode::kGraphExecutionFailure, "hidden_states output shape disagrees with metadata");
    }
    const std::size_t layer_stride = B * T * H;
    for (std::size_t b = 0; b < B; ++b) {
      const float* src = hidden.data + static_cast<std::size_t>(layer - 1) * layer_stride + b * T * H;
      out.push_back(LayerFeatures{layer, Matrix(T, H, std::vector<float>(src, src + T * H))});
    }
  }
  return out;
}

const Codebook& OnnxBackend::CodebookFor(int layer) const {
  CheckLayer(layer);
  const auto it = bundle_->codebooks.find(layer);
  if (it == bundle_->codebooks.end()) {
    throw Error(ErrorCode::kLayerOutOfRange, "bundle has no codebook for layer " + std::to_string(layer));
  }
  return it->second;
}

BackendFactory MakeOnnxBackendFactory(std::shared_ptr<const ModelBundle> bundle, OnnxOptions options) {
  return [bundle = std::move(bundle), options = std::move(options)]() -> std::unique_ptr<Backend> {
    return std::make_unique<OnnxBackend>(bundle, options);
  };
}

}  // namespace zsapa
