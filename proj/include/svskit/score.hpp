#pragma once

#include <span>
#include <string>
#include <vector>

#include "svskit/pitch.hpp"

namespace svskit {

/// Note value used for unpitched rows; serialized as the token "rest".
inline constexpr int kRestNote = -1;

struct AlignedPhone {
    std::string phone;
    double start = 0.0;      // seconds
    double end = 0.0;        // seconds
    int syllable_id = 0;
};

/// One note event inside a syllable: the sub-segment's quantized MIDI note,
/// its duration, and whether the row continues the syllable on a new pitch.
struct SlurEntry {
    int midi = kRestNote;
    int slur = 0;
    double duration = 0.0;   // seconds
};

/// Phone-level music score for one utterance. All vectors share one length;
/// row i describes one phone (or one slur continuation of a phone).
struct MusicScore {
    std::string utterance_id;
    std::string text;
    std::vector<std::string> phones;
    std::vector<int> notes;               // MIDI 0..127, or kRestNote
    std::vector<double> note_durations;   // seconds
    std::vector<double> phone_durations;  // seconds
    std::vector<int> slurs;               // 0 or 1

    std::size_t size() const { return phones.size(); }
    bool operator==(const MusicScore&) const = default;
};

/// MIDI note number for a frequency (69 = A4 = 440 Hz). Input must be > 0.
double hz_to_midi(double f0_hz);

/// Quantized-mode note over the voiced frames whose times fall in
/// [start, end): each frame's f0 is rounded to the nearest MIDI integer and
/// the most frequent value wins; ties resolve to the smaller note. Returns
/// kRestNote when the span holds no voiced frame.
int syllable_midi(const PitchTrack& track, double start, double end);

/// Splits [start, end) into 200 ms sub-segments (a remainder of at least
/// 100 ms keeps its own sub-segment, a shorter one merges into the previous)
/// and quantizes each. The first entry carries slur 0; later entries carry
/// slur 1 exactly when their note differs from the previous entry's.
std::vector<SlurEntry> detect_slurs(const PitchTrack& track, double start, double end);

/// Builds the score for one phrase from its aligned phones and raw pitch
/// track (frame times relative to the phrase start). Voiced gaps are
/// interpolated internally; a syllable whose span has no voiced frame in the
/// raw track becomes a rest. Within a syllable, consecutive equal-note
/// sub-segments are merged into one row; a note change appends a slur row
/// that repeats the syllable's last phone.
MusicScore build_score(std::span<const AlignedPhone> phones, const std::string& text,
                       const PitchTrack& raw_track, const std::string& utterance_id);

/// Serializes one score as a single text line:
///   utt_id|text|phones|notes|note_durations|phone_durations|slurs
/// Sub-fields are space-separated; durations use 6 decimal places; notes are
/// MIDI integers or "rest".
std::string write_score(const MusicScore& score);
MusicScore parse_score(const std::string& line, std::size_t line_number = 1);

/// Whole-file helpers: one utterance per LF-terminated line.
std::string write_score_file(std::span<const MusicScore> scores);
std::vector<MusicScore> parse_score_file(const std::string& text);

/// Phone alignment format: one phone per line,
///   phone<TAB>start<TAB>end<TAB>syllable_id
/// with times in seconds. Blank lines are ignored.
std::vector<AlignedPhone> parse_alignment(const std::string& text);
std::string write_alignment(std::span<const AlignedPhone> phones);

} // namespace svskit
