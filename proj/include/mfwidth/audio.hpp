#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfwidth/signal.hpp"

namespace mfwidth::audio {

struct AudioClip {
  std::vector<std::vector<double>> channels;  // equal length, in [-1, 1]
  double sample_rate = 0.0;
  std::string source_path;

  std::size_t frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

// Integer PCM WAV (8/16/24/32-bit, plain or WAVE_FORMAT_EXTENSIBLE).
// Samples are scaled by 2^-(bits-1); 8-bit data is offset-binary.
AudioClip load_wav(const std::filesystem::path& path);
AudioClip decode_wav(const std::vector<unsigned char>& bytes,
                     std::string source_path = {});

// 16-bit PCM encoder. Samples are mapped back with round(x * 32768), clamped
// to the int16 range, so decode(encode(decode(f))) reproduces f's samples.
std::vector<unsigned char> encode_wav16(const AudioClip& clip);
void save_wav16(const AudioClip& clip, const std::filesystem::path& path);

AudioClip mixdown_mono(const AudioClip& clip);
AudioClip normalize_peak(const AudioClip& clip);

// Cuts round(duration_s * rate) frames starting at round(start_s * rate) from
// a mono clip.
Signal extract_segment(const AudioClip& clip, double start_s, double duration_s);

}  // namespace mfwidth::audio
