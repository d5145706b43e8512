#include "svskit/mel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "svskit/fft.hpp"

namespace svskit {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / static_cast<double>(n)));
    }
    return w;
}

} // namespace

double MelConfig::floor_amplitude() const { return std::pow(10.0, floor_db / 20.0); }
double MelConfig::log_floor() const { return std::log(floor_amplitude()); }
double MelConfig::log_ceil() const { return std::log(std::pow(10.0, ceil_db / 20.0)); }

std::size_t MelConfig::frame_count(std::size_t n_samples) const {
    if (n_samples < static_cast<std::size_t>(win_length)) return 0;
    return (n_samples - static_cast<std::size_t>(win_length)) / static_cast<std::size_t>(hop_length) + 1;
}

void MelConfig::validate() const {
    if (fft_size <= 0 || (fft_size & (fft_size - 1)) != 0) {
        throw std::runtime_error("fft_size must be a power of two");
    }
    if (win_length <= 0 || win_length > fft_size) throw std::runtime_error("win_length must be in (0, fft_size]");
    if (hop_length <= 0 || hop_length > win_length) throw std::runtime_error("hop_length must be in (0, win_length]");
    if (n_mels <= 0) throw std::runtime_error("n_mels must be positive");
    if (!(0.0 <= fmin_hz && fmin_hz < fmax_hz && fmax_hz <= sample_rate / 2.0)) {
        throw std::runtime_error("mel band range must satisfy 0 <= fmin < fmax <= Nyquist");
    }
    if (!(floor_db < ceil_db)) throw std::runtime_error("floor_db must lie below ceil_db");
}

MelFilterbank::MelFilterbank(const MelConfig& config) {
    config.validate();
    const std::size_t n_bins = static_cast<std::size_t>(config.fft_size) / 2 + 1;
    const std::size_t n_mels = static_cast<std::size_t>(config.n_mels);
    weights = TensorData::matrix(n_mels, n_bins);
    centers_hz.resize(n_mels);

    const double mel_lo = hz_to_mel(config.fmin_hz);
    const double mel_hi = hz_to_mel(config.fmax_hz);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        double m = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
        edges[i] = mel_to_hz(m);
    }
    const double bin_hz = static_cast<double>(config.sample_rate) / static_cast<double>(config.fft_size);
    for (std::size_t b = 0; b < n_mels; ++b) {
        const double f_lo = edges[b], f_c = edges[b + 1], f_hi = edges[b + 2];
        centers_hz[b] = f_c;
        double row_sum = 0.0;
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            double w = 0.0;
            if (f >= f_lo && f <= f_c && f_c > f_lo) {
                w = (f - f_lo) / (f_c - f_lo);
            } else if (f > f_c && f <= f_hi && f_hi > f_c) {
                w = (f_hi - f) / (f_hi - f_c);
            }
            weights(b, k) = w;
            row_sum += w;
        }
        if (row_sum > 0.0) {
            for (std::size_t k = 0; k < n_bins; ++k) weights(b, k) /= row_sum;
        }
    }
}

TensorData stft_magnitude(std::span<const double> wave, const MelConfig& config) {
    config.validate();
    const std::size_t n_frames = config.frame_count(wave.size());
    const std::size_t n_bins = static_cast<std::size_t>(config.fft_size) / 2 + 1;
    const std::vector<double> window = hann_window(config.win_length);
    double window_sum = 0.0;
    for (double w : window) window_sum += w;

    TensorData out = TensorData::matrix(n_frames, n_bins);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(config.fft_size));
    for (std::size_t f = 0; f < n_frames; ++f) {
        const double* src = wave.data() + f * static_cast<std::size_t>(config.hop_length);
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (int i = 0; i < config.win_length; ++i) {
            buf[static_cast<std::size_t>(i)] = src[i] * window[static_cast<std::size_t>(i)];
        }
        fft_inplace(buf, false);
        for (std::size_t k = 0; k < n_bins; ++k) {
            out(f, k) = std::abs(buf[k]) / window_sum;
        }
    }
    return out;
}

TensorData mel_spectrogram(std::span<const double> wave, const MelConfig& config) {
    const TensorData spec = stft_magnitude(wave, config);
    const MelFilterbank fb(config);
    const std::size_t n_frames = spec.rows();
    const std::size_t n_bins = spec.cols();
    const std::size_t n_mels = static_cast<std::size_t>(config.n_mels);
    const double lo = config.log_floor();
    const double hi = config.log_ceil();

    TensorData out = TensorData::matrix(n_frames, n_mels);
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t b = 0; b < n_mels; ++b) {
            double acc = 0.0;
            const double* w = fb.weights.data.data() + b * n_bins;
            const double* s = spec.data.data() + f * n_bins;
            for (std::size_t k = 0; k < n_bins; ++k) acc += w[k] * s[k];
            double v = std::log(std::max(acc, config.floor_amplitude()));
            out(f, b) = std::clamp(v, lo, hi);
        }
    }
    return out;
}

TensorData normalize_mel(const TensorData& log_mel, const MelConfig& config) {
    const double lo = config.log_floor();
    const double hi = config.log_ceil();
    TensorData out = log_mel;
    for (double& v : out.data) v = 2.0 * (v - lo) / (hi - lo) - 1.0;
    return out;
}

TensorData denormalize_mel(const TensorData& norm_mel, const MelConfig& config) {
    const double lo = config.log_floor();
    const double hi = config.log_ceil();
    TensorData out = norm_mel;
    for (double& v : out.data) v = lo + (v + 1.0) * 0.5 * (hi - lo);
    return out;
}

TensorData mel_cepstrum(const TensorData& log_mel, int order) {
    if (log_mel.rank() != 2) throw std::runtime_error("mel_cepstrum expects [frames, bands]");
    const std::size_t n_frames = log_mel.rows();
    const std::size_t n_bands = log_mel.cols();
    if (order <= 0 || static_cast<std::size_t>(order) >= n_bands) {
        throw std::runtime_error("cepstrum order must be in [1, bands)");
    }
    TensorData out = TensorData::matrix(n_frames, static_cast<std::size_t>(order));
    const double sk = std::sqrt(2.0 / static_cast<double>(n_bands));
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (int k = 1; k <= order; ++k) {
            double acc = 0.0;
            for (std::size_t n = 0; n < n_bands; ++n) {
                acc += log_mel(f, n) *
                       std::cos(kPi * (2.0 * static_cast<double>(n) + 1.0) * static_cast<double>(k) /
                                (2.0 * static_cast<double>(n_bands)));
            }
            out(f, static_cast<std::size_t>(k - 1)) = sk * acc;
        }
    }
    return out;
}

} // namespace svskit
