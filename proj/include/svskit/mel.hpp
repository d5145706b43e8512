#pragma once

#include <span>
#include <vector>

#include "svskit/tensor.hpp"

namespace svskit {

struct MelConfig {
    int sample_rate = 16000;
    int fft_size = 512;
    int win_length = 512;
    int hop_length = 128;
    int n_mels = 80;
    double fmin_hz = 30.0;
    double fmax_hz = 8000.0;
    /// Spectral floor / ceiling in dB relative to full scale; the log-mel
    /// range [ln floor, ln ceil] maps affinely onto [-1, 1].
    double floor_db = -96.0;
    double ceil_db = 0.0;

    double floor_amplitude() const;  // 10^(floor_db/20)
    double log_floor() const;        // ln(floor_amplitude)
    double log_ceil() const;         // ln(10^(ceil_db/20))
    std::size_t frame_count(std::size_t n_samples) const;
    void validate() const;
};

/// Triangular filterbank on the 2595*log10(1 + f/700) mel scale, rows
/// normalized to sum to one.
struct MelFilterbank {
    explicit MelFilterbank(const MelConfig& config);

    TensorData weights;              // [n_mels, fft_size/2 + 1]
    std::vector<double> centers_hz;  // [n_mels] triangle apex frequencies
};

/// Magnitude short-time spectrum: Hann window (periodic), no padding, frames
/// start at multiples of hop_length, magnitudes divided by the window sum.
/// Returns [frames, fft_size/2 + 1].
TensorData stft_magnitude(std::span<const double> wave, const MelConfig& config);

/// Natural-log mel spectrogram, clamped below at log_floor() and above at
/// log_ceil(). Returns [frames, n_mels]; values are unnormalized.
TensorData mel_spectrogram(std::span<const double> wave, const MelConfig& config);

/// Affine map of log-mel values onto [-1, 1] and back. Values at the clamp
/// bounds land exactly on -1 / +1.
TensorData normalize_mel(const TensorData& log_mel, const MelConfig& config);
TensorData denormalize_mel(const TensorData& norm_mel, const MelConfig& config);

/// Orthonormal DCT-II cepstrum of a log-mel spectrogram; returns
/// coefficients 1..order per frame as [frames, order]. The 0th (energy)
/// coefficient is excluded.
TensorData mel_cepstrum(const TensorData& log_mel, int order = 13);

} // namespace svskit
