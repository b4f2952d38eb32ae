#include "gbfilt/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "gbfilt/error.hpp"

namespace gbf::io {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV codec assumes little-endian host");

constexpr std::uint16_t kWavePcm = 1;
constexpr std::uint16_t kWaveFloat = 3;
constexpr std::uint16_t kWaveExtensible = 0xFFFE;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw SignalFormatError("WAV: truncated header");
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

bool has_wav_extension(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Signal parse_csv(std::string_view text) {
  std::vector<double> samples;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    // Multi-column files keep the first column.
    line = trim(line.substr(0, line.find(',')));
    double v = 0.0;
    if (!parse_number(line, v)) {
      if (samples.empty() && line_no == 1) continue;
      throw SignalFormatError("CSV line " + std::to_string(line_no) + ": '" + std::string(line) +
                              "' is not a number");
    }
    if (!std::isfinite(v)) {
      throw SignalFormatError("CSV line " + std::to_string(line_no) + ": non-finite sample");
    }
    samples.push_back(v);
  }
  if (samples.empty()) throw SignalFormatError("CSV contains no samples");
  return Signal(std::move(samples));
}

std::string format_csv(const Signal& s) {
  std::string out;
  out.reserve(s.size() * 24);
  for (double v : s) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

SignalFile parse_wav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw SignalFormatError("WAV: missing RIFF/WAVE header");
  }
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const auto id = bytes.substr(pos, 4);
    const auto len = read_le<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Some writers leave a bogus data length; accept whatever is present.
      if (id != "data") throw SignalFormatError("WAV: chunk overruns file");
    }
    if (id == "fmt ") {
      format = read_le<std::uint16_t>(bytes, body);
      channels = read_le<std::uint16_t>(bytes, body + 2);
      rate = read_le<std::uint32_t>(bytes, body + 4);
      bits = read_le<std::uint16_t>(bytes, body + 14);
      if (format == kWaveExtensible) format = read_le<std::uint16_t>(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.substr(body, std::min<std::size_t>(len, bytes.size() - body));
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt) throw SignalFormatError("WAV: no fmt chunk");
  if (data.data() == nullptr) throw SignalFormatError("WAV: no data chunk");
  if (channels != 1) {
    throw SignalFormatError("WAV: expected mono, got " + std::to_string(channels) + " channels");
  }
  if (rate == 0) throw SignalFormatError("WAV: zero sample rate");

  SignalFile out;
  out.sample_rate = rate;
  std::vector<double> samples;
  if (format == kWavePcm && bits == 16) {
    out.format = SignalFormat::WavPcm16;
    samples.resize(data.size() / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = read_le<std::int16_t>(data, 2 * i) / 32768.0;
    }
  } else if (format == kWaveFloat && bits == 32) {
    out.format = SignalFormat::WavFloat32;
    samples.resize(data.size() / 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const float v = read_le<float>(data, 4 * i);
      if (!std::isfinite(v)) {
        throw SignalFormatError("WAV: non-finite sample at index " + std::to_string(i));
      }
      samples[i] = v;
    }
  } else {
    throw SignalFormatError("WAV: unsupported encoding (format " + std::to_string(format) + ", " +
                            std::to_string(bits) + " bits); need PCM16 or float32");
  }
  if (samples.empty()) throw SignalFormatError("WAV: no samples");
  out.signal = Signal(std::move(samples), static_cast<double>(rate));
  return out;
}

std::string format_wav(const SignalFile& file) {
  const bool pcm = file.format == SignalFormat::WavPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_len = static_cast<std::uint32_t>(file.signal.size() * block);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  append_le<std::uint32_t>(out, 36 + data_len);
  out += "WAVEfmt ";
  append_le<std::uint32_t>(out, 16);
  append_le<std::uint16_t>(out, pcm ? kWavePcm : kWaveFloat);
  append_le<std::uint16_t>(out, 1);
  append_le<std::uint32_t>(out, file.sample_rate);
  append_le<std::uint32_t>(out, file.sample_rate * block);
  append_le<std::uint16_t>(out, block);
  append_le<std::uint16_t>(out, bits);
  out += "data";
  append_le<std::uint32_t>(out, data_len);
  for (double v : file.signal) {
    if (pcm) {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      append_le<std::int16_t>(out, static_cast<std::int16_t>(scaled));
    } else {
      append_le<float>(out, static_cast<float>(v));
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SignalFormatError("cannot open '" + path + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place at '" + path + "'");
  }
}

SignalFile read_signal(const std::string& path) {
  const std::string bytes = read_file(path);
  try {
    if (has_wav_extension(path)) return parse_wav(bytes);
    return SignalFile{parse_csv(bytes), SignalFormat::Csv, 16000};
  } catch (const SignalFormatError& e) {
    throw SignalFormatError(path + ": " + e.what());
  }
}

void write_signal(const std::string& path, const SignalFile& file) {
  if (file.format == SignalFormat::Csv) {
    write_file_atomic(path, format_csv(file.signal));
  } else {
    write_file_atomic(path, format_wav(file));
  }
}

}  // namespace gbf::io
