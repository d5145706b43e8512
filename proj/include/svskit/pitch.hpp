#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace svskit {

/// Frame-synchronous fundamental-frequency track. Frame i covers time
/// i * hop_seconds; f0_hz[i] is 0 when the frame is unvoiced (before
/// interpolation).
struct PitchTrack {
    double hop_seconds = 0.010;
    std::vector<double> f0_hz;
    std::vector<std::uint8_t> voiced;

    std::size_t size() const { return f0_hz.size(); }
    double frame_time(std::size_t i) const { return static_cast<double>(i) * hop_seconds; }
};

struct PitchTrackerConfig {
    double fmin_hz = 60.0;
    double fmax_hz = 1000.0;
    double window_seconds = 0.040;
    double hop_seconds = 0.010;
    /// Normalized autocorrelation peak required to call a frame voiced.
    double voicing_threshold = 0.45;
    /// Frames whose RMS falls below this linear amplitude are unvoiced.
    double energy_floor = 1e-4;
};

/// Normalized-autocorrelation pitch tracker with parabolic peak refinement.
/// Among local maxima within 0.01 of the global one, the smallest lag wins,
/// which suppresses octave-down errors on strongly periodic input. The
/// window must cover at least two periods of fmin_hz.
PitchTrack extract_f0_autocorr(std::span<const double> wave,
                               const PitchTrackerConfig& config = {});

/// Splits audio into voiced phrases separated by silence. A region counts as
/// silence when its frame RMS stays below threshold_db (dBFS, relative to
/// full scale 1.0) for at least min_gap_seconds. Returned spans are
/// [start, end) in seconds, in order, non-overlapping.
std::vector<std::pair<double, double>> segment_on_silence(std::span<const double> wave,
                                                          double threshold_db = -40.0,
                                                          double min_gap_seconds = 0.5);

/// Linearly interpolates f0 over unvoiced gaps; leading/trailing unvoiced
/// runs are filled with the nearest voiced value. All frames of the result
/// are marked voiced. Requires at least one voiced frame.
PitchTrack interpolate_unvoiced(const PitchTrack& track);

} // namespace svskit
