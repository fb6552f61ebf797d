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

#include "zsapa/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "zsapa/error.hpp"

namespace zsapa {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

// Zero crossings of the sinc kept on each side of the centre, measured at
// the cutoff frequency.
constexpr double kSincZeroCrossings = 32.0;
constexpr double kKaiserBeta = 8.6;

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::vector<unsigned char> ReadAllBytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double KaiserWindow(double x) {
  // x in [-1, 1]
  const double arg = kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - x * x));
  return std::cyl_bessel_i(0.0, arg) / std::cyl_bessel_i(0.0, kKaiserBeta);
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Polyphase view of the windowed-sinc kernel. For rational rate ratios the
// fractional offset of each output sample cycles through `phases` values, so
// the taps are tabulated once per phase. Very large phase counts (coprime
// odd rates) fall back to evaluating the window directly.
class ResampleKernel {
 public:
  ResampleKernel(int input_rate, int output_rate)
      : cutoff_(std::min(1.0, static_cast<double>(output_rate) / input_rate)),
        half_width_(kSincZeroCrossings / cutoff_) {
    const int g = std::gcd(input_rate, output_rate);
    phases_ = output_rate / g;
    decimation_ = input_rate / g;
    radius_ = static_cast<std::ptrdiff_t>(std::ceil(half_width_)) + 1;
    if (phases_ <= kMaxTabulatedPhases) {
      const std::size_t width = static_cast<std::size_t>(2 * radius_ + 1);
      table_.resize(static_cast<std::size_t>(phases_) * width);
      for (long long ph = 0; ph < phases_; ++ph) {
        const double frac = static_cast<double>(ph) / static_cast<double>(phases_);
        for (std::ptrdiff_t k = -radius_; k <= radius_; ++k) {
          table_[static_cast<std::size_t>(ph) * width + static_cast<std::size_t>(k + radius_)] =
              Tap(static_cast<double>(k) - frac);
        }
      }
    }
  }

  float Evaluate(std::span<const float> input, std::size_t n) const {
    const long long pos = static_cast<long long>(n) * decimation_;
    const auto base = static_cast<std::ptrdiff_t>(pos / phases_);
    const long long ph = pos % phases_;
    const auto len = static_cast<std::ptrdiff_t>(input.size());
    const std::ptrdiff_t first = std::max<std::ptrdiff_t>(0, base - radius_);
    const std::ptrdiff_t last = std::min<std::ptrdiff_t>(len - 1, base + radius_);
    const std::size_t width = static_cast<std::size_t>(2 * radius_ + 1);
    const double frac = static_cast<double>(ph) / static_cast<double>(phases_);
    double acc = 0.0;
    for (std::ptrdiff_t i = first; i <= last; ++i) {
      const std::ptrdiff_t k = i - base;
      const double tap = table_.empty()
                             ? Tap(static_cast<double>(k) - frac)
                             : table_[static_cast<std::size_t>(ph) * width + static_cast<std::size_t>(k + radius_)];
      acc += static_cast<double>(input[static_cast<std::size_t>(i)]) * tap;
    }
    return static_cast<float>(std::clamp(acc, -1.0, 1.0));
  }

 private:
  static constexpr long long kMaxTabulatedPhases = 4096;

  // x is the distance from the output instant in input samples.
  double Tap(double x) const {
    if (std::abs(x) >= half_width_) return 0.0;
    return cutoff_ * Sinc(cutoff_ * x) * KaiserWindow(x / half_width_);
  }

  double cutoff_;      // relative to input Nyquist, in (0, 1]
  double half_width_;  // in input samples
  long long phases_ = 1;
  long long decimation_ = 1;
  std::ptrdiff_t radius_ = 0;
  std::vector<double> table_;
};

}  // namespace

std::size_t ResampledLength(std::size_t input_len, int input_rate, int output_rate) {
  const auto num = static_cast<unsigned long long>(input_len) * static_cast<unsigned>(output_rate);
  const auto den = static_cast<unsigned long long>(input_rate);
  return static_cast<std::size_t>((num + den / 2) / den);
}

std::vector<float> ResampleSerial(std::span<const float> input, int input_rate, int output_rate) {
  if (input_rate <= 0 || output_rate <= 0) {
    throw Error(ErrorCode::kInvalidParams, "sample rates must be positive");
  }
  if (input_rate == output_rate) return {input.begin(), input.end()};
  const ResampleKernel kernel(input_rate, output_rate);
  std::vector<float> out(ResampledLength(input.size(), input_rate, output_rate));
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = kernel.Evaluate(input, n);
  return out;
}

std::vector<float> Resample(std::span<const float> input, int input_rate, int output_rate) {
  if (input_rate <= 0 || output_rate <= 0) {
    throw Error(ErrorCode::kInvalidParams, "sample rates must be positive");
  }
  if (input_rate == output_rate) return {input.begin(), input.end()};
  const ResampleKernel kernel(input_rate, output_rate);
  std::vector<float> out(ResampledLength(input.size(), input_rate, output_rate));
  const auto n_out = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < n_out; ++n) {
    out[static_cast<std::size_t>(n)] = kernel.Evaluate(input, static_cast<std::size_t>(n));
  }
  return out;
}

WavData ReadWav(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = ReadAllBytes(path);
  const auto unsupported = [&](const std::string& why) {
    return Error(ErrorCode::kUnsupportedFormat, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw unsupported("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw unsupported("fmt chunk too short");
      format = ReadU16(chunk + 8);
      channels = ReadU16(chunk + 10);
      sample_rate = ReadU32(chunk + 12);
      bits = ReadU16(chunk + 22);
      if (format == kFormatExtensible) {
        if (available < 40) throw unsupported("extensible fmt chunk too short");
        // First two bytes of the sub-format GUID hold the real format tag.
        format = ReadU16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = available;
    }
    pos = body + size + (size & 1U);
  }

  if (!have_fmt) throw unsupported("missing fmt chunk");
  if (data == nullptr) throw unsupported("missing data chunk");
  if (channels == 0 || sample_rate == 0) throw unsupported("zero channels or sample rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw unsupported("codec " + std::to_string(format) + "/" + std::to_string(bits) +
                      " bits (need PCM16 or float32)");
  }

  WavData wav;
  wav.sample_rate = static_cast<int>(sample_rate);
  wav.channels = channels;
  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n = (data_size / frame_bytes) * channels;
  wav.interleaved.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data + i * bytes_per_sample;
    if (pcm16) {
      const auto v = static_cast<std::int16_t>(ReadU16(p));
      wav.interleaved[i] = static_cast<float>(v) / 32768.0f;
    } else {
      const float v = std::bit_cast<float>(ReadU32(p));
      if (!std::isfinite(v)) throw unsupported("non-finite float sample");
      wav.interleaved[i] = std::clamp(v, -1.0f, 1.0f);
    }
  }
  return wav;
}

void WriteWav(const std::filesystem::path& path, std::span<const float> interleaved,
              int sample_rate, int channels, WavEncoding encoding) {
  if (channels <= 0 || sample_rate <= 0 || interleaved.size() % static_cast<std::size_t>(channels) != 0) {
    throw Error(ErrorCode::kInvalidParams, "inconsistent WAV layout");
  }
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t tag = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, tag);
  PutU16(out, static_cast<std::uint16_t>(channels));
  PutU32(out, static_cast<std::uint32_t>(sample_rate));
  PutU32(out, static_cast<std::uint32_t>(sample_rate * channels * (bits / 8)));
  PutU16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  PutU16(out, bits);
  out += "data";
  PutU32(out, data_bytes);
  for (float x : interleaved) {
    if (encoding == WavEncoding::kPcm16) {
      const long q = std::lround(static_cast<double>(x) * 32768.0);
      PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
    } else {
      PutU32(out, std::bit_cast<std::uint32_t>(x));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

std::vector<float> MixToMono(const WavData& wav) {
  const std::size_t frames = wav.frames();
  if (wav.channels == 1) return wav.interleaved;
  std::vector<float> mono(frames);
  const auto ch = static_cast<std::size_t>(wav.channels);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += wav.interleaved[f * ch + c];
    mono[f] = static_cast<float>(acc / static_cast<double>(ch));
  }
  return mono;
}

AudioClip LoadAudio(const std::filesystem::path& path) {
  const WavData wav = ReadWav(path);
  if (wav.frames() == 0) throw Error(ErrorCode::kEmptyAudio, path.string());
  AudioClip clip;
  clip.samples = Resample(MixToMono(wav), wav.sample_rate, kTargetSampleRate);
  if (clip.samples.empty()) throw Error(ErrorCode::kEmptyAudio, path.string());
  clip.sample_rate = kTargetSampleRate;
  clip.source_id = path.stem().string();
  return clip;
}

}  // namespace zsapa
