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

#include "zsapa/backend.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "zsapa/error.hpp"

namespace zsapa {

namespace {

constexpr int kDefaultLayer = 7;

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int RequireInt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(ErrorCode::kInvalidBundle, std::string("metadata.json: missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

}  // namespace

std::size_t BundleMetadata::FrameCount(std::size_t samples) const {
  const auto rf = static_cast<std::size_t>(receptive_field_samples);
  const auto hop = static_cast<std::size_t>(frame_hop_samples);
  if (samples < rf || hop == 0) return 0;
  return 1 + (samples - rf) / hop;
}

std::vector<LayerFeatures> Backend::ContextualizeBatch(const FrameSequence& frames,
                                                       std::span<const IndexSet> masks, int layer) {
  std::vector<LayerFeatures> out;
  out.reserve(masks.size());
  for (const IndexSet& m : masks) out.push_back(Contextualize(frames, m, layer));
  return out;
}

void Backend::CheckLayer(int layer) const {
  if (layer < 1 || layer > metadata().num_layers) {
    throw Error(ErrorCode::kLayerOutOfRange, "layer " + std::to_string(layer) + " not in [1, " +
                                                 std::to_string(metadata().num_layers) + "]");
  }
}

void Backend::CheckMasked(const FrameSequence& frames, std::span<const std::size_t> masked) const {
  for (std::size_t m : masked) {
    if (m >= frames.T()) {
      throw Error(ErrorCode::kInvalidParams, "masked index " + std::to_string(m) + " outside " +
                                                 std::to_string(frames.T()) + " frames");
    }
  }
}

BundleMetadata ParseBundleMetadata(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidBundle, std::string("metadata.json: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidBundle, "metadata.json: not an object");

  BundleMetadata m;
  m.format_version = RequireInt(j, "format_version");
  m.sample_rate = RequireInt(j, "sample_rate");
  m.frame_hop_samples = RequireInt(j, "frame_hop_samples");
  m.receptive_field_samples = RequireInt(j, "receptive_field_samples");
  m.feature_dim = RequireInt(j, "feature_dim");
  m.hidden_dim = j.contains("hidden_dim") ? RequireInt(j, "hidden_dim") : m.feature_dim;
  m.num_layers = RequireInt(j, "num_layers");

  if (m.format_version != 1) {
    throw Error(ErrorCode::kInvalidBundle, "unsupported format_version " + std::to_string(m.format_version));
  }
  if (m.sample_rate != kTargetSampleRate) {
    throw Error(ErrorCode::kInvalidBundle, "sample_rate must be 16000, got " + std::to_string(m.sample_rate));
  }
  if (m.frame_hop_samples < 1 || m.receptive_field_samples < 1 || m.feature_dim < 1 || m.hidden_dim < 1 ||
      m.num_layers < 1) {
    throw Error(ErrorCode::kInvalidBundle, "metadata sizes must be positive");
  }

  if (j.contains("codebook_files")) {
    const auto& files = j.at("codebook_files");
    if (!files.is_object()) throw Error(ErrorCode::kInvalidBundle, "codebook_files must be an object");
    for (const auto& [key, value] : files.items()) {
      int layer = 0;
      try {
        std::size_t used = 0;
        layer = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidBundle, "codebook_files key '" + key + "' is not a layer number");
      }
      if (layer < 1 || layer > m.num_layers) {
        throw Error(ErrorCode::kInvalidBundle, "codebook for layer " + key + " outside [1, num_layers]");
      }
      if (!value.is_string()) throw Error(ErrorCode::kInvalidBundle, "codebook_files values must be strings");
      m.codebook_files[layer] = value.get<std::string>();
    }
  }
  return m;
}

std::string SerializeBundleMetadata(const BundleMetadata& m) {
  nlohmann::ordered_json j;
  j["format_version"] = m.format_version;
  j["sample_rate"] = m.sample_rate;
  j["frame_hop_samples"] = m.frame_hop_samples;
  j["receptive_field_samples"] = m.receptive_field_samples;
  j["feature_dim"] = m.feature_dim;
  j["hidden_dim"] = m.hidden_dim;
  j["num_layers"] = m.num_layers;
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& [layer, name] : m.codebook_files) files[std::to_string(layer)] = name;
  j["codebook_files"] = files;
  return j.dump(2) + "\n";
}

std::vector<float> ReadMaskVector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() % 4 != 0) throw Error(ErrorCode::kTruncatedFile, path.string() + ": not a whole float32 count");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned char* p = bytes.data() + 4 * i;
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    out[i] = std::bit_cast<float>(u);
    if (!std::isfinite(out[i])) throw Error(ErrorCode::kInvalidBundle, path.string() + ": non-finite value");
  }
  return out;
}

void WriteMaskVector(const std::filesystem::path& path, std::span<const float> values) {
  std::string buf;
  buf.reserve(values.size() * 4);
  for (float v : values) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

ModelBundle LoadBundle(const std::filesystem::path& directory) {
  std::error_code ec;
  if (!std::filesystem::is_directory(directory, ec)) {
    throw Error(ErrorCode::kFileNotFound, "bundle directory " + directory.string());
  }
  ModelBundle bundle;
  bundle.directory = directory;
  bundle.metadata = ParseBundleMetadata(ReadText(directory / "metadata.json"));

  if (!std::filesystem::is_regular_file(bundle.GraphPath(), ec)) {
    throw Error(ErrorCode::kInvalidBundle, "missing " + bundle.GraphPath().string());
  }
  bundle.mask_vector = ReadMaskVector(directory / "mask.f32");
  if (bundle.mask_vector.size() != static_cast<std::size_t>(bundle.metadata.feature_dim)) {
    throw Error(ErrorCode::kInvalidBundle, "mask.f32 holds " + std::to_string(bundle.mask_vector.size()) +
                                               " values, feature_dim is " +
                                               std::to_string(bundle.metadata.feature_dim));
  }
  for (const auto& [layer, name] : bundle.metadata.codebook_files) {
    Codebook cb = LoadCodebook(directory / name, static_cast<std::size_t>(bundle.metadata.hidden_dim));
    if (cb.layer != layer) {
      throw Error(ErrorCode::kLayerMismatch, name + " was fitted on layer " + std::to_string(cb.layer) +
                                                 " but is registered for layer " + std::to_string(layer));
    }
    bundle.codebooks.emplace(layer, std::move(cb));
  }
  return bundle;
}

std::vector<std::string> BundleWarnings(const ModelBundle& bundle) {
  std::vector<std::string> warnings;
  if (bundle.codebooks.empty()) warnings.emplace_back("bundle has no codebooks");
  if (bundle.metadata.num_layers >= kDefaultLayer && !bundle.codebooks.contains(kDefaultLayer)) {
    warnings.emplace_back("no codebook for the default layer 7");
  }
  for (const auto& [layer, cb] : bundle.codebooks) {
    if (cb.size() < 2) warnings.push_back("codebook for layer " + std::to_string(layer) + " is degenerate");
  }
  return warnings;
}

}  // namespace zsapa
