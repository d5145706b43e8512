#pragma once

#include <string>
#include <vector>

namespace svskit {

inline constexpr int kSampleRate = 16000;

/// Reads a RIFF/WAVE file. Only PCM16, mono, 16 kHz input is accepted;
/// anything else raises std::runtime_error with a description of the
/// offending field. Samples are scaled to [-1, 1) as value / 32768.
std::vector<double> read_wav(const std::string& path);

/// Writes PCM16 mono 16 kHz. Samples are clamped to [-1, 1] before
/// quantization (round-to-nearest).
void write_wav(const std::string& path, const std::vector<double>& samples);

} // namespace svskit
