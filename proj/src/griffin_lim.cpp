#include "svskit/griffin_lim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "svskit/fft.hpp"
#include "svskit/rng.hpp"

namespace svskit {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / static_cast<double>(n)));
    }
    return w;
}

using Spectrogram = std::vector<std::vector<std::complex<double>>>; // [frames][bins]

// Unnormalized windowed STFT on the analysis grid used by stft_magnitude.
Spectrogram stft_complex(const std::vector<double>& x, const MelConfig& cfg,
                         const std::vector<double>& window, std::size_t n_frames) {
    const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
    Spectrogram spec(n_frames, std::vector<std::complex<double>>(n_bins));
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
    for (std::size_t f = 0; f < n_frames; ++f) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        const std::size_t offset = f * static_cast<std::size_t>(cfg.hop_length);
        for (int i = 0; i < cfg.win_length; ++i) {
            std::size_t idx = offset + static_cast<std::size_t>(i);
            double v = idx < x.size() ? x[idx] : 0.0;
            buf[static_cast<std::size_t>(i)] = v * window[static_cast<std::size_t>(i)];
        }
        fft_inplace(buf, false);
        for (std::size_t k = 0; k < n_bins; ++k) spec[f][k] = buf[k];
    }
    return spec;
}

// Weighted overlap-add inverse STFT (synthesis window = analysis window).
std::vector<double> istft(const Spectrogram& spec, const MelConfig& cfg,
                          const std::vector<double>& window) {
    const std::size_t n_frames = spec.size();
    const std::size_t n = (n_frames - 1) * static_cast<std::size_t>(cfg.hop_length) +
                          static_cast<std::size_t>(cfg.win_length);
    std::vector<double> y(n, 0.0), norm(n, 0.0);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
    const std::size_t n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t k = 0; k < n_bins; ++k) buf[k] = spec[f][k];
        for (std::size_t k = n_bins; k < buf.size(); ++k) {
            buf[k] = std::conj(spec[f][buf.size() - k]);
        }
        fft_inplace(buf, true);
        const std::size_t offset = f * static_cast<std::size_t>(cfg.hop_length);
        for (int i = 0; i < cfg.win_length; ++i) {
            const double w = window[static_cast<std::size_t>(i)];
            y[offset + static_cast<std::size_t>(i)] += w * buf[static_cast<std::size_t>(i)].real();
            norm[offset + static_cast<std::size_t>(i)] += w * w;
        }
    }
    // Divide by the steady-state overlap weight rather than each sample's own
    // accumulated weight: near the edges that weight tends to zero, and
    // dividing by it turns any phase inconsistency into loud clicks. A
    // constant denominator reconstructs the interior exactly (the squared
    // window sums to the same value at every fully-covered sample) and leaves
    // the edges tapered instead of amplified.
    double peak = 0.0;
    for (double v : norm) peak = std::max(peak, v);
    const double denom = std::max(peak, 1e-8);
    for (std::size_t i = 0; i < n; ++i) y[i] /= denom;
    return y;
}

} // namespace

std::vector<double> griffin_lim(const TensorData& log_mel, const MelConfig& config,
                                int iterations, std::uint64_t seed) {
    config.validate();
    if (log_mel.rank() != 2 || log_mel.cols() != static_cast<std::size_t>(config.n_mels)) {
        throw std::runtime_error("griffin_lim expects a [frames, n_mels] log-mel input");
    }
    if (iterations < 0) throw std::runtime_error("iterations must be non-negative");
    const std::size_t n_frames = log_mel.rows();
    if (n_frames == 0) return {};

    const MelFilterbank fb(config);
    const std::size_t n_bins = static_cast<std::size_t>(config.fft_size) / 2 + 1;
    const std::size_t n_mels = static_cast<std::size_t>(config.n_mels);
    const std::vector<double> window = hann_window(config.win_length);
    double window_sum = 0.0;
    for (double w : window) window_sum += w;

    // Transposed-filterbank projection of mel magnitudes onto linear bins,
    // rescaled into raw (window-sum weighted) spectrum units.
    std::vector<double> col_sum(n_bins, 0.0);
    for (std::size_t b = 0; b < n_mels; ++b) {
        for (std::size_t k = 0; k < n_bins; ++k) col_sum[k] += fb.weights(b, k);
    }
    TensorData mag = TensorData::matrix(n_frames, n_bins);
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t k = 0; k < n_bins; ++k) {
            double acc = 0.0;
            for (std::size_t b = 0; b < n_mels; ++b) {
                acc += fb.weights(b, k) * std::exp(log_mel(f, b));
            }
            mag(f, k) = acc / std::max(col_sum[k], 1e-8) * window_sum;
        }
    }

    Rng rng(derive_seed(seed, "griffin_lim.phase"));
    Spectrogram spec(n_frames, std::vector<std::complex<double>>(n_bins));
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t k = 0; k < n_bins; ++k) {
            double phase = 2.0 * kPi * rng.uniform();
            spec[f][k] = std::polar(mag(f, k), phase);
        }
    }

    std::vector<double> x;
    for (int it = 0; it < iterations; ++it) {
        x = istft(spec, config, window);
        Spectrogram est = stft_complex(x, config, window, n_frames);
        for (std::size_t f = 0; f < n_frames; ++f) {
            for (std::size_t k = 0; k < n_bins; ++k) {
                double a = std::abs(est[f][k]);
                spec[f][k] = a > 1e-12 ? est[f][k] / a * mag(f, k)
                                       : std::polar(mag(f, k), 0.0);
            }
        }
    }
    return istft(spec, config, window);
}

} // namespace svskit
