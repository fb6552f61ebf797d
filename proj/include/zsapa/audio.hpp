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

#ifndef ZSAPA_AUDIO_HPP_
#define ZSAPA_AUDIO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace zsapa {

inline constexpr int kTargetSampleRate = 16000;

/// Mono waveform ready for the encoder. After LoadAudio the rate is always
/// kTargetSampleRate and every sample is finite and within [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kTargetSampleRate;
  std::string source_id;
};

/// Decoded RIFF/WAVE content before mixdown and resampling.
struct WavData {
  int sample_rate = 0;
  int channels = 0;
  std::vector<float> interleaved;  // scaled to [-1, 1]

  std::size_t frames() const {
    return channels == 0 ? 0 : interleaved.size() / static_cast<std::size_t>(channels);
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Decodes PCM16 or IEEE float32 WAVE (plain or WAVE_FORMAT_EXTENSIBLE).
/// Throws Error{kFileNotFound | kUnsupportedFormat}.
WavData ReadWav(const std::filesystem::path& path);

void WriteWav(const std::filesystem::path& path, std::span<const float> interleaved,
              int sample_rate, int channels, WavEncoding encoding = WavEncoding::kPcm16);

/// Loads any supported WAV as a 16 kHz mono clip. Channels are averaged
/// before resampling; 16 kHz input is returned sample-for-sample.
/// Throws Error{kFileNotFound | kUnsupportedFormat | kEmptyAudio}.
AudioClip LoadAudio(const std::filesystem::path& path);

/// Output length for converting `input_len` samples between rates, rounded
/// to the nearest sample.
std::size_t ResampledLength(std::size_t input_len, int input_rate, int output_rate);

/// Band-limited (Kaiser-windowed sinc) resampling. Identity when the rates
/// match. The cutoff is the lower of the two Nyquist frequencies.
std::vector<float> Resample(std::span<const float> input, int input_rate, int output_rate);

/// Serial reference for Resample; same arithmetic per output sample.
std::vector<float> ResampleSerial(std::span<const float> input, int input_rate,
                                  int output_rate);

std::vector<float> MixToMono(const WavData& wav);

}  // namespace zsapa

#endif  // ZSAPA_AUDIO_HPP_
