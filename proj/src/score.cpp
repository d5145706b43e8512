#include "svskit/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace svskit {

namespace {

constexpr double kSubSegment = 0.200;
constexpr double kMinRemainder = 0.100;
constexpr double kTimeEps = 1e-9;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_number, const std::string& why) {
    throw std::runtime_error("score line " + std::to_string(line_number) + ": " + why);
}

double parse_duration(const std::string& tok, std::size_t line_number, const char* field) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        parse_fail(line_number, std::string("bad ") + field + " value '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v) || v < 0.0) {
        parse_fail(line_number, std::string("bad ") + field + " value '" + tok + "'");
    }
    return v;
}

void validate_score(const MusicScore& s) {
    const std::size_t n = s.size();
    if (n == 0) throw std::runtime_error("score has no rows: " + s.utterance_id);
    if (s.notes.size() != n || s.note_durations.size() != n || s.phone_durations.size() != n ||
        s.slurs.size() != n) {
        throw std::runtime_error("score field lengths differ: " + s.utterance_id);
    }
    if (s.utterance_id.empty() || s.utterance_id.find('|') != std::string::npos ||
        s.utterance_id.find_first_of(" \t\n") != std::string::npos) {
        throw std::runtime_error("bad utterance id: '" + s.utterance_id + "'");
    }
    if (s.text.find('|') != std::string::npos || s.text.find('\n') != std::string::npos) {
        throw std::runtime_error("score text may not contain '|' or newlines: " + s.utterance_id);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.phones[i].empty() || s.phones[i].find_first_of(" \t\n|") != std::string::npos) {
            throw std::runtime_error("bad phone token in " + s.utterance_id);
        }
        if (s.notes[i] != kRestNote && (s.notes[i] < 0 || s.notes[i] > 127)) {
            throw std::runtime_error("note out of MIDI range in " + s.utterance_id);
        }
        if (!(s.note_durations[i] > 0.0) || !(s.phone_durations[i] > 0.0)) {
            throw std::runtime_error("non-positive duration in " + s.utterance_id);
        }
        if (s.slurs[i] != 0 && s.slurs[i] != 1) {
            throw std::runtime_error("slur flag must be 0 or 1 in " + s.utterance_id);
        }
    }
}

} // namespace

double hz_to_midi(double f0_hz) {
    if (!(f0_hz > 0.0)) throw std::runtime_error("hz_to_midi requires a positive frequency");
    return 69.0 + 12.0 * std::log2(f0_hz / 440.0);
}

int syllable_midi(const PitchTrack& track, double start, double end) {
    std::map<int, int> counts;
    for (std::size_t i = 0; i < track.size(); ++i) {
        double t = track.frame_time(i);
        if (t < start - kTimeEps || t >= end - kTimeEps) continue;
        if (!track.voiced[i] || track.f0_hz[i] <= 0.0) continue;
        int midi = static_cast<int>(std::lround(hz_to_midi(track.f0_hz[i])));
        midi = std::clamp(midi, 0, 127);
        ++counts[midi];
    }
    if (counts.empty()) return kRestNote;
    // std::map iterates keys ascending, so on a tie the smaller note wins.
    int best_midi = kRestNote;
    int best_count = 0;
    for (const auto& [midi, count] : counts) {
        if (count > best_count) {
            best_midi = midi;
            best_count = count;
        }
    }
    return best_midi;
}

std::vector<SlurEntry> detect_slurs(const PitchTrack& track, double start, double end) {
    if (!(end > start)) throw std::runtime_error("detect_slurs requires end > start");
    const double span = end - start;

    std::vector<double> bounds; // sub-segment boundaries, relative offsets
    bounds.push_back(0.0);
    std::size_t n_full = static_cast<std::size_t>(std::floor(span / kSubSegment + kTimeEps));
    for (std::size_t i = 1; i <= n_full; ++i) bounds.push_back(static_cast<double>(i) * kSubSegment);
    double remainder = span - static_cast<double>(n_full) * kSubSegment;
    if (remainder > kTimeEps) {
        if (remainder >= kMinRemainder - kTimeEps || bounds.size() == 1) {
            bounds.push_back(span); // remainder becomes its own sub-segment
        } else {
            bounds.back() = span;   // short remainder merges into the previous one
        }
    }

    std::vector<SlurEntry> entries;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        SlurEntry e;
        e.midi = syllable_midi(track, start + bounds[i], start + bounds[i + 1]);
        e.duration = bounds[i + 1] - bounds[i];
        e.slur = (i > 0 && e.midi != entries[i - 1].midi) ? 1 : 0;
        entries.push_back(e);
    }
    return entries;
}

MusicScore build_score(std::span<const AlignedPhone> phones, const std::string& text,
                       const PitchTrack& raw_track, const std::string& utterance_id) {
    if (phones.empty()) throw std::runtime_error("build_score requires at least one phone");

    bool any_voiced = false;
    for (std::size_t i = 0; i < raw_track.size(); ++i) any_voiced |= raw_track.voiced[i] != 0;
    PitchTrack contour = any_voiced ? interpolate_unvoiced(raw_track) : raw_track;

    MusicScore score;
    score.utterance_id = utterance_id;
    score.text = text;

    std::size_t i = 0;
    while (i < phones.size()) {
        const int syll = phones[i].syllable_id;
        std::size_t j = i;
        while (j < phones.size() && phones[j].syllable_id == syll) ++j;
        const double syll_start = phones[i].start;
        const double syll_end = phones[j - 1].end;
        if (!(syll_end > syll_start)) {
            throw std::runtime_error("empty syllable span in " + utterance_id);
        }

        // Rest detection looks at the raw track: no voiced frame -> rest.
        bool voiced_span = false;
        for (std::size_t f = 0; f < raw_track.size(); ++f) {
            double t = raw_track.frame_time(f);
            if (t < syll_start - kTimeEps || t >= syll_end - kTimeEps) continue;
            voiced_span |= raw_track.voiced[f] != 0;
        }

        if (!voiced_span) {
            for (std::size_t k = i; k < j; ++k) {
                score.phones.push_back(phones[k].phone);
                score.notes.push_back(kRestNote);
                score.note_durations.push_back(syll_end - syll_start);
                score.phone_durations.push_back(phones[k].end - phones[k].start);
                score.slurs.push_back(0);
            }
            i = j;
            continue;
        }

        // Merge consecutive equal-note sub-segments into note groups.
        std::vector<SlurEntry> subs = detect_slurs(contour, syll_start, syll_end);
        std::vector<SlurEntry> groups;
        for (const SlurEntry& e : subs) {
            if (!groups.empty() && groups.back().midi == e.midi) {
                groups.back().duration += e.duration;
            } else {
                groups.push_back(e);
            }
        }

        // First group covers the syllable's phones; each later group appends
        // a slur row repeating the last phone.
        for (std::size_t k = i; k < j; ++k) {
            score.phones.push_back(phones[k].phone);
            score.notes.push_back(groups.front().midi);
            score.note_durations.push_back(groups.front().duration);
            score.phone_durations.push_back(phones[k].end - phones[k].start);
            score.slurs.push_back(0);
        }
        for (std::size_t g = 1; g < groups.size(); ++g) {
            score.phones.push_back(phones[j - 1].phone);
            score.notes.push_back(groups[g].midi);
            score.note_durations.push_back(groups[g].duration);
            score.phone_durations.push_back(groups[g].duration);
            score.slurs.push_back(1);
        }
        i = j;
    }

    validate_score(score);
    return score;
}

std::string write_score(const MusicScore& score) {
    validate_score(score);
    std::ostringstream os;
    os << score.utterance_id << '|' << score.text << '|';
    for (std::size_t i = 0; i < score.size(); ++i) os << (i ? " " : "") << score.phones[i];
    os << '|';
    for (std::size_t i = 0; i < score.size(); ++i) {
        os << (i ? " " : "");
        if (score.notes[i] == kRestNote) {
            os << "rest";
        } else {
            os << score.notes[i];
        }
    }
    os << '|';
    for (std::size_t i = 0; i < score.size(); ++i) os << (i ? " " : "") << fmt6(score.note_durations[i]);
    os << '|';
    for (std::size_t i = 0; i < score.size(); ++i) os << (i ? " " : "") << fmt6(score.phone_durations[i]);
    os << '|';
    for (std::size_t i = 0; i < score.size(); ++i) os << (i ? " " : "") << score.slurs[i];
    return os.str();
}

MusicScore parse_score(const std::string& line, std::size_t line_number) {
    std::vector<std::string> fields = split(line, '|');
    if (fields.size() != 7) {
        parse_fail(line_number, "expected 7 '|'-separated fields, got " + std::to_string(fields.size()));
    }
    MusicScore s;
    s.utterance_id = fields[0];
    s.text = fields[1];
    s.phones = split_ws(fields[2]);
    const std::size_t n = s.phones.size();
    if (n == 0) parse_fail(line_number, "no phones");

    std::vector<std::string> notes = split_ws(fields[3]);
    std::vector<std::string> ndur = split_ws(fields[4]);
    std::vector<std::string> pdur = split_ws(fields[5]);
    std::vector<std::string> slur = split_ws(fields[6]);
    if (notes.size() != n || ndur.size() != n || pdur.size() != n || slur.size() != n) {
        parse_fail(line_number, "field lengths differ (phones=" + std::to_string(n) +
                                    ", notes=" + std::to_string(notes.size()) +
                                    ", note_durations=" + std::to_string(ndur.size()) +
                                    ", phone_durations=" + std::to_string(pdur.size()) +
                                    ", slurs=" + std::to_string(slur.size()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (notes[i] == "rest") {
            s.notes.push_back(kRestNote);
        } else {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(notes[i], &used);
            } catch (const std::exception&) {
                parse_fail(line_number, "bad note token '" + notes[i] + "'");
            }
            if (used != notes[i].size() || v < 0 || v > 127) {
                parse_fail(line_number, "note out of MIDI range: '" + notes[i] + "'");
            }
            s.notes.push_back(v);
        }
        s.note_durations.push_back(parse_duration(ndur[i], line_number, "note duration"));
        s.phone_durations.push_back(parse_duration(pdur[i], line_number, "phone duration"));
        if (slur[i] == "0") {
            s.slurs.push_back(0);
        } else if (slur[i] == "1") {
            s.slurs.push_back(1);
        } else {
            parse_fail(line_number, "bad slur flag '" + slur[i] + "'");
        }
    }
    try {
        validate_score(s);
    } catch (const std::exception& e) {
        parse_fail(line_number, e.what());
    }
    return s;
}

std::string write_score_file(std::span<const MusicScore> scores) {
    std::ostringstream os;
    for (const MusicScore& s : scores) os << write_score(s) << '\n';
    return os.str();
}

std::vector<MusicScore> parse_score_file(const std::string& text) {
    std::vector<MusicScore> out;
    std::size_t line_number = 0;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(parse_score(line, line_number));
    }
    return out;
}

std::vector<AlignedPhone> parse_alignment(const std::string& text) {
    std::vector<AlignedPhone> out;
    std::istringstream is(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(is, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split(line, '\t');
        if (f.size() != 4) {
            throw std::runtime_error("alignment line " + std::to_string(line_number) +
                                     ": expected phone<TAB>start<TAB>end<TAB>syllable_id");
        }
        AlignedPhone p;
        p.phone = f[0];
        try {
            p.start = std::stod(f[1]);
            p.end = std::stod(f[2]);
            p.syllable_id = std::stoi(f[3]);
        } catch (const std::exception&) {
            throw std::runtime_error("alignment line " + std::to_string(line_number) + ": bad number");
        }
        if (p.phone.empty() || !(p.end > p.start) || p.start < 0.0 || p.syllable_id < 0) {
            throw std::runtime_error("alignment line " + std::to_string(line_number) + ": invalid entry");
        }
        if (!out.empty() && p.start < out.back().start) {
            throw std::runtime_error("alignment line " + std::to_string(line_number) + ": not sorted by start time");
        }
        out.push_back(p);
    }
    return out;
}

std::string write_alignment(std::span<const AlignedPhone> phones) {
    std::ostringstream os;
    for (const AlignedPhone& p : phones) {
        os << p.phone << '\t' << fmt6(p.start) << '\t' << fmt6(p.end) << '\t' << p.syllable_id << '\n';
    }
    return os.str();
}

} // namespace svskit
