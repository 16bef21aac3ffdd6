#include "mfwidth/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>

#include "mfwidth/error.hpp"

namespace mfwidth::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::MalformedContainer, "malformed container: " + what);
}

[[noreturn]] void unsupported(const std::string& what) {
  throw Error(ErrorKind::UnsupportedEncoding, "unsupported encoding: " + what);
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) malformed(std::string("truncated ") + what);
  }

  std::string tag() {
    require(4, "chunk header");
    std::string out(reinterpret_cast<const char*>(&bytes_[pos_]), 4);
    pos_ += 4;
    return out;
  }

  std::uint16_t u16() {
    require(2, "field");
    const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    require(4, "field");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  void skip(std::size_t n) {
    require(n, "chunk body");
    pos_ += n;
  }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

struct Format {
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

Format parse_fmt(ByteReader& in, std::uint32_t size) {
  if (size < 16) malformed("fmt chunk shorter than 16 bytes");
  const std::size_t start = in.position();
  Format fmt;
  std::uint16_t tag = in.u16();
  fmt.channels = in.u16();
  fmt.sample_rate = in.u32();
  in.u32();  // byte rate
  fmt.block_align = in.u16();
  fmt.bits = in.u16();
  if (tag == kFormatExtensible) {
    if (size < 40) malformed("extensible fmt chunk shorter than 40 bytes");
    in.u16();  // cbSize
    in.u16();  // valid bits
    in.u32();  // channel mask
    tag = in.u16();  // leading two bytes of the subformat GUID
  }
  in.skip(size - (in.position() - start));
  if (size % 2 == 1 && in.remaining() > 0) in.skip(1);

  if (tag != kFormatPcm) {
    unsupported(tag == 3 ? std::string("IEEE float samples")
                         : "format tag " + std::to_string(tag));
  }
  if (fmt.bits != 8 && fmt.bits != 16 && fmt.bits != 24 && fmt.bits != 32) {
    unsupported(std::to_string(fmt.bits) + "-bit samples");
  }
  if (fmt.channels == 0) malformed("zero channels");
  if (fmt.sample_rate == 0) malformed("zero sample rate");
  if (fmt.block_align != fmt.channels * (fmt.bits / 8)) malformed("inconsistent block align");
  return fmt;
}

double decode_sample(const unsigned char* p, std::uint16_t bits) {
  switch (bits) {
    case 8:
      return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return static_cast<double>(v) / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    default: {
      const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                              (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
      return static_cast<double>(static_cast<std::int32_t>(u)) / 2147483648.0;
    }
  }
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioClip decode_wav(const std::vector<unsigned char>& bytes, std::string source_path) {
  ByteReader in(bytes);
  if (in.remaining() < 12) malformed("file shorter than RIFF header");
  if (in.tag() != "RIFF") malformed("missing RIFF tag");
  in.u32();
  if (in.tag() != "WAVE") malformed("missing WAVE tag");

  std::optional<Format> fmt;
  while (in.remaining() >= 8) {
    const std::string id = in.tag();
    const std::uint32_t size = in.u32();
    if (id == "fmt ") {
      fmt = parse_fmt(in, size);
    } else if (id == "data") {
      if (!fmt) malformed("data chunk before fmt chunk");
      if (size > in.remaining()) malformed("data chunk runs past end of file");
      const std::size_t frames = size / fmt->block_align;
      if (frames == 0) malformed("no sample frames");

      AudioClip clip;
      clip.sample_rate = static_cast<double>(fmt->sample_rate);
      clip.source_path = std::move(source_path);
      clip.channels.assign(fmt->channels, std::vector<double>(frames));
      const unsigned char* base = bytes.data() + in.position();
      const std::size_t width = fmt->bits / 8;
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < fmt->channels; ++c) {
          clip.channels[c][f] = decode_sample(base + f * fmt->block_align + c * width, fmt->bits);
        }
      }
      return clip;
    } else {
      if (size > in.remaining()) malformed("chunk '" + id + "' runs past end of file");
      in.skip(size);
      if (size % 2 == 1 && in.remaining() > 0) in.skip(1);
    }
  }
  malformed(fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw Error(ErrorKind::InvalidInput, "cannot open '" + path.string() + "'");
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

std::vector<unsigned char> encode_wav16(const AudioClip& clip) {
  if (clip.channels.empty() || clip.frames() == 0) {
    throw Error(ErrorKind::InvalidInput, "cannot encode an empty clip");
  }
  for (const auto& ch : clip.channels) {
    if (ch.size() != clip.frames()) {
      throw Error(ErrorKind::InvalidInput, "channels differ in length");
    }
  }
  const auto channels = static_cast<std::uint16_t>(clip.channels.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));
  const std::uint16_t block_align = channels * 2;
  const auto data_size = static_cast<std::uint32_t>(clip.frames() * block_align);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block_align);
  put_u16(out, block_align);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (std::size_t f = 0; f < clip.frames(); ++f) {
    for (const auto& ch : clip.channels) {
      const double scaled = std::clamp(std::round(ch[f] * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
  }
  return out;
}

void save_wav16(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav16(clip);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
}

AudioClip mixdown_mono(const AudioClip& clip) {
  if (clip.channels.empty()) throw Error(ErrorKind::InvalidInput, "clip has no channels");
  if (clip.channels.size() == 1) return clip;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_path = clip.source_path;
  out.channels.assign(1, std::vector<double>(clip.frames(), 0.0));
  const double count = static_cast<double>(clip.channels.size());
  for (std::size_t f = 0; f < clip.frames(); ++f) {
    double sum = 0.0;
    for (const auto& ch : clip.channels) sum += ch[f];
    out.channels[0][f] = sum / count;
  }
  return out;
}

AudioClip normalize_peak(const AudioClip& clip) {
  double peak = 0.0;
  for (const auto& ch : clip.channels) {
    for (double v : ch) peak = std::max(peak, std::abs(v));
  }
  if (!(peak > 0.0)) throw Error(ErrorKind::SilentClip, "silent clip");
  AudioClip out = clip;
  if (peak == 1.0) return out;
  for (auto& ch : out.channels) {
    for (double& v : ch) v /= peak;
  }
  return out;
}

Signal extract_segment(const AudioClip& clip, double start_s, double duration_s) {
  if (clip.channels.size() != 1) {
    throw Error(ErrorKind::InvalidInput, "segment extraction needs a mono clip");
  }
  if (!std::isfinite(start_s) || !std::isfinite(duration_s) || start_s < 0.0 ||
      duration_s <= 0.0) {
    throw Error(ErrorKind::SegmentOutOfRange, "segment exceeds clip: empty or negative window");
  }
  const auto begin = static_cast<std::size_t>(std::llround(start_s * clip.sample_rate));
  const auto length = static_cast<std::size_t>(std::llround(duration_s * clip.sample_rate));
  if (length == 0 || begin + length > clip.frames()) {
    throw Error(ErrorKind::SegmentOutOfRange, "segment exceeds clip");
  }
  const auto& ch = clip.channels.front();
  const auto first = ch.begin() + static_cast<std::ptrdiff_t>(begin);
  return Signal(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(length)),
                clip.sample_rate);
}

}  // namespace mfwidth::audio
