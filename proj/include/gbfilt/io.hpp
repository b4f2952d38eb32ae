#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "gbfilt/signal.hpp"

namespace gbf::io {

enum class SignalFormat { Csv, WavPcm16, WavFloat32 };

/// A signal plus the on-disk encoding it came from, so outputs can mirror inputs.
struct SignalFile {
  Signal signal;
  SignalFormat format = SignalFormat::Csv;
  std::uint32_t sample_rate = 16000;
};

/// Chooses by extension: `.wav` is parsed as RIFF/WAVE, anything else as CSV.
SignalFile read_signal(const std::string& path);
void write_signal(const std::string& path, const SignalFile& file);

/// One sample per line; a non-numeric first line is treated as a header.
Signal parse_csv(std::string_view text);
std::string format_csv(const Signal& s);

/// Mono PCM16 or IEEE float32 WAV. PCM16 maps to [-1, 1) by dividing by 32768.
SignalFile parse_wav(std::string_view bytes);
std::string format_wav(const SignalFile& file);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Writes to a temporary file next to `path`, then renames over it.
void write_file_atomic(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace gbf::io
