#include "svskit/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "svskit/wav.hpp"

namespace svskit {

namespace {

double frame_rms(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return std::sqrt(acc / static_cast<double>(n == 0 ? 1 : n));
}

} // namespace

PitchTrack extract_f0_autocorr(std::span<const double> wave, const PitchTrackerConfig& config) {
    if (config.fmin_hz <= 0.0 || config.fmax_hz <= config.fmin_hz) {
        throw std::runtime_error("pitch tracker needs 0 < fmin < fmax");
    }
    if (config.window_seconds * config.fmin_hz < 2.0) {
        throw std::runtime_error("pitch window must cover at least two periods of fmin");
    }
    const double sr = static_cast<double>(kSampleRate);
    const std::size_t win = static_cast<std::size_t>(std::lround(config.window_seconds * sr));
    const std::size_t hop = static_cast<std::size_t>(std::lround(config.hop_seconds * sr));
    const std::size_t lag_min = static_cast<std::size_t>(std::floor(sr / config.fmax_hz));
    const std::size_t lag_max = std::min(win - 1, static_cast<std::size_t>(std::ceil(sr / config.fmin_hz)));

    PitchTrack track;
    track.hop_seconds = config.hop_seconds;
    if (wave.size() < win) return track;

    const std::size_t n_frames = (wave.size() - win) / hop + 1;
    track.f0_hz.assign(n_frames, 0.0);
    track.voiced.assign(n_frames, 0);

    std::vector<double> x(win), ps(win + 1), r(lag_max + 1, 0.0);
    for (std::size_t f = 0; f < n_frames; ++f) {
        const double* src = wave.data() + f * hop;
        double mean = 0.0;
        for (std::size_t i = 0; i < win; ++i) mean += src[i];
        mean /= static_cast<double>(win);
        for (std::size_t i = 0; i < win; ++i) x[i] = src[i] - mean;
        if (frame_rms(x.data(), win) < config.energy_floor) continue;

        ps[0] = 0.0;
        for (std::size_t i = 0; i < win; ++i) ps[i + 1] = ps[i] + x[i] * x[i];

        // Normalized cross-correlation over candidate lags.
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            const std::size_t n = win - lag;
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i) num += x[i] * x[i + lag];
            double e0 = ps[n];
            double e1 = ps[win] - ps[lag];
            double den = std::sqrt(e0 * e1);
            r[lag] = den > 1e-12 ? num / den : 0.0;
        }

        double best = -2.0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) best = std::max(best, r[lag]);
        if (best < config.voicing_threshold) continue;

        // Smallest-lag local maximum within 0.01 of the best peak.
        std::size_t pick = 0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            double left = lag > lag_min ? r[lag - 1] : -2.0;
            double right = lag < lag_max ? r[lag + 1] : -2.0;
            if (r[lag] >= left && r[lag] >= right && r[lag] >= best - 0.01) {
                pick = lag;
                break;
            }
        }
        if (pick == 0) continue;

        double refined = static_cast<double>(pick);
        if (pick > lag_min && pick < lag_max) {
            double denom = r[pick - 1] - 2.0 * r[pick] + r[pick + 1];
            if (std::abs(denom) > 1e-12) {
                double delta = 0.5 * (r[pick - 1] - r[pick + 1]) / denom;
                if (delta > -0.5 && delta < 0.5) refined += delta;
            }
        }
        double f0 = sr / refined;
        if (f0 < config.fmin_hz || f0 > config.fmax_hz) continue;
        track.f0_hz[f] = f0;
        track.voiced[f] = 1;
    }
    return track;
}

std::vector<std::pair<double, double>> segment_on_silence(std::span<const double> wave,
                                                          double threshold_db,
                                                          double min_gap_seconds) {
    const double sr = static_cast<double>(kSampleRate);
    const std::size_t frame = static_cast<std::size_t>(std::lround(0.010 * sr));
    const double threshold = std::pow(10.0, threshold_db / 20.0);

    std::vector<std::pair<double, double>> phrases;
    if (wave.empty()) return phrases;

    const std::size_t n_frames = (wave.size() + frame - 1) / frame;
    std::vector<std::uint8_t> loud(n_frames, 0);
    for (std::size_t f = 0; f < n_frames; ++f) {
        std::size_t begin = f * frame;
        std::size_t len = std::min(frame, wave.size() - begin);
        loud[f] = frame_rms(wave.data() + begin, len) >= threshold ? 1 : 0;
    }

    const std::size_t min_gap_frames =
        static_cast<std::size_t>(std::lround(min_gap_seconds / 0.010));

    // Collect loud runs, then merge runs separated by short quiet gaps.
    std::vector<std::pair<std::size_t, std::size_t>> runs; // [start, end) frames
    std::size_t f = 0;
    while (f < n_frames) {
        if (!loud[f]) {
            ++f;
            continue;
        }
        std::size_t start = f;
        while (f < n_frames && loud[f]) ++f;
        runs.emplace_back(start, f);
    }
    // Only gaps strictly longer than min_gap split phrases.
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && run.first - merged.back().second <= min_gap_frames) {
            merged.back().second = run.second;
        } else {
            merged.push_back(run);
        }
    }
    phrases.reserve(merged.size());
    for (const auto& run : merged) {
        double start = static_cast<double>(run.first) * 0.010;
        double end = std::min(static_cast<double>(run.second) * 0.010,
                              static_cast<double>(wave.size()) / sr);
        phrases.emplace_back(start, end);
    }
    return phrases;
}

PitchTrack interpolate_unvoiced(const PitchTrack& track) {
    PitchTrack out = track;
    const std::size_t n = track.size();
    std::vector<std::size_t> voiced_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (track.voiced[i]) voiced_idx.push_back(i);
    }
    if (voiced_idx.empty()) {
        throw std::runtime_error("cannot interpolate a track with no voiced frames");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (track.voiced[i]) continue;
        auto it = std::lower_bound(voiced_idx.begin(), voiced_idx.end(), i);
        if (it == voiced_idx.begin()) {
            out.f0_hz[i] = track.f0_hz[voiced_idx.front()];
        } else if (it == voiced_idx.end()) {
            out.f0_hz[i] = track.f0_hz[voiced_idx.back()];
        } else {
            std::size_t hi = *it;
            std::size_t lo = *(it - 1);
            double w = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
            out.f0_hz[i] = (1.0 - w) * track.f0_hz[lo] + w * track.f0_hz[hi];
        }
        out.voiced[i] = 1;
    }
    return out;
}

} // namespace svskit
