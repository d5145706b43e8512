#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "svskit/rng.hpp"
#include "svskit/score.hpp"

using namespace svskit;

namespace {

PitchTrack constant_track(double f0, std::size_t frames) {
    PitchTrack t;
    t.f0_hz.assign(frames, f0);
    t.voiced.assign(frames, 1);
    return t;
}

PitchTrack piecewise_track(std::initializer_list<std::pair<double, std::size_t>> parts) {
    PitchTrack t;
    for (const auto& [f0, frames] : parts) {
        for (std::size_t i = 0; i < frames; ++i) {
            t.f0_hz.push_back(f0);
            t.voiced.push_back(f0 > 0.0 ? 1 : 0);
        }
    }
    return t;
}

} // namespace

TEST_CASE("hz_to_midi standard points") {
    CHECK(hz_to_midi(440.0) == doctest::Approx(69.0).epsilon(1e-12));
    CHECK(hz_to_midi(220.0) == doctest::Approx(57.0).epsilon(1e-12));
    CHECK(hz_to_midi(261.626) == doctest::Approx(60.0).epsilon(1e-3));
    CHECK_THROWS(hz_to_midi(0.0));
    CHECK_THROWS(hz_to_midi(-5.0));
}

TEST_CASE("syllable_midi takes the quantized mode") {
    const PitchTrack constant = constant_track(440.0, 40);
    CHECK(syllable_midi(constant, 0.0, 0.40) == 69);

    // 30 frames at 220 Hz (MIDI 57) plus 10 at 233.08 Hz (MIDI 58).
    const PitchTrack mixed = piecewise_track({{220.0, 30}, {233.08, 10}});
    CHECK(syllable_midi(mixed, 0.0, 0.40) == 57);

    // Unvoiced span reports a rest.
    const PitchTrack silent = piecewise_track({{0.0, 20}});
    CHECK(syllable_midi(silent, 0.0, 0.20) == kRestNote);
}

TEST_CASE("syllable_midi tie resolves to the smaller note") {
    const PitchTrack tie = piecewise_track({{220.0, 10}, {246.94, 10}});
    CHECK(syllable_midi(tie, 0.0, 0.20) == 57);
}

TEST_CASE("syllable_midi matches a brute-force histogram oracle") {
    Rng rng(314);
    for (int trial = 0; trial < 50; ++trial) {
        PitchTrack track;
        const std::size_t frames = 20 + static_cast<std::size_t>(rng.uniform_int(0, 180));
        for (std::size_t i = 0; i < frames; ++i) {
            const bool voiced = rng.uniform() < 0.8;
            track.voiced.push_back(voiced ? 1 : 0);
            track.f0_hz.push_back(voiced ? 80.0 + 700.0 * rng.uniform() : 0.0);
        }
        const double start = 0.0;
        const double end = static_cast<double>(frames) * 0.010;

        std::map<int, int> histogram;
        for (std::size_t i = 0; i < frames; ++i) {
            if (!track.voiced[i]) continue;
            histogram[static_cast<int>(std::lround(hz_to_midi(track.f0_hz[i])))]++;
        }
        int expected = kRestNote;
        int best = 0;
        for (const auto& [midi, count] : histogram) {
            if (count > best) {  // map iterates ascending, so ties keep the smaller key
                best = count;
                expected = midi;
            }
        }
        CHECK(syllable_midi(track, start, end) == expected);
    }
}

TEST_CASE("detect_slurs applies the 200 ms sub-segment rule") {
    // 500 ms syllable: 200 ms at 220 Hz then 300 ms at 246.94 Hz. The 100 ms
    // remainder is big enough to keep its own sub-segment.
    const PitchTrack track = piecewise_track({{220.0, 20}, {246.94, 30}});
    const auto entries = detect_slurs(track, 0.0, 0.50);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].midi == 57);
    CHECK(entries[0].slur == 0);
    CHECK(entries[0].duration == doctest::Approx(0.2));
    CHECK(entries[1].midi == 59);
    CHECK(entries[1].slur == 1);
    CHECK(entries[1].duration == doctest::Approx(0.2));
    CHECK(entries[2].midi == 59);
    CHECK(entries[2].slur == 0);  // same note as previous: no new slur
    CHECK(entries[2].duration == doctest::Approx(0.1));
}

TEST_CASE("short syllables yield a single entry") {
    const PitchTrack track = constant_track(440.0, 15);
    const auto entries = detect_slurs(track, 0.0, 0.15);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].midi == 69);
    CHECK(entries[0].slur == 0);
    CHECK(entries[0].duration == doctest::Approx(0.15));
}

TEST_CASE("sub-200ms remainders merge into the previous sub-segment") {
    // 280 ms: one 200 ms block plus an 80 ms remainder -> one sub-segment.
    const PitchTrack track = constant_track(440.0, 28);
    const auto entries = detect_slurs(track, 0.0, 0.28);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].duration == doctest::Approx(0.28));

    // 480 ms: blocks of 200 + 280 after merging the 80 ms remainder.
    const auto entries2 = detect_slurs(constant_track(440.0, 48), 0.0, 0.48);
    REQUIRE(entries2.size() == 2);
    CHECK(entries2[0].duration == doctest::Approx(0.2));
    CHECK(entries2[1].duration == doctest::Approx(0.28));
}

TEST_CASE("constant pitch never slurs, regardless of length") {
    const auto entries = detect_slurs(constant_track(440.0, 60), 0.0, 0.60);
    REQUIRE(entries.size() == 3);
    for (const auto& e : entries) {
        CHECK(e.midi == 69);
        CHECK(e.slur == 0);
    }
}

TEST_CASE("build_score expands slur sub-segments into extra rows") {
    // One syllable, one phone "a" spanning the 500 ms two-tone example.
    std::vector<AlignedPhone> phones = {{"a", 0.0, 0.5, 0}};
    const PitchTrack track = piecewise_track({{220.0, 20}, {246.94, 30}});
    const MusicScore score = build_score(phones, "a", track, "utt1");
    REQUIRE(score.size() == 2);
    CHECK(score.phones[0] == "a");
    CHECK(score.phones[1] == "a");  // slur row repeats the phone
    CHECK(score.notes[0] == 57);
    CHECK(score.notes[1] == 59);
    CHECK(score.slurs[0] == 0);
    CHECK(score.slurs[1] == 1);
    CHECK(score.note_durations[0] == doctest::Approx(0.2));
    CHECK(score.note_durations[1] == doctest::Approx(0.3));  // merged 0.2 + 0.1
    CHECK(score.phone_durations[0] == doctest::Approx(0.5));
    CHECK(score.phone_durations[1] == doctest::Approx(0.3));
}

TEST_CASE("build_score emits one row per phone at constant pitch") {
    std::vector<AlignedPhone> phones = {{"l", 0.0, 0.1, 0}, {"a", 0.1, 0.6, 0}};
    const MusicScore score = build_score(phones, "la", constant_track(220.0, 60), "utt1");
    REQUIRE(score.size() == 2);
    CHECK(score.notes[0] == 57);
    CHECK(score.notes[1] == 57);
    CHECK(score.note_durations[0] == doctest::Approx(0.6));
    CHECK(score.note_durations[1] == doctest::Approx(0.6));
    CHECK(score.phone_durations[0] == doctest::Approx(0.1));
    CHECK(score.phone_durations[1] == doctest::Approx(0.5));
    CHECK(score.slurs == std::vector<int>{0, 0});
}

TEST_CASE("a span with no raw voicing becomes a rest") {
    std::vector<AlignedPhone> phones = {{"sil", 0.0, 0.3, 0}, {"a", 0.3, 0.6, 1}};
    const PitchTrack track = piecewise_track({{0.0, 30}, {220.0, 30}});
    const MusicScore score = build_score(phones, "a", track, "utt1");
    REQUIRE(score.size() == 2);
    CHECK(score.notes[0] == kRestNote);
    CHECK(score.notes[1] == 57);
}

TEST_CASE("score rows always satisfy the length and range invariants") {
    Rng rng(2718);
    for (int trial = 0; trial < 25; ++trial) {
        PitchTrack track;
        const std::size_t frames = 120;
        for (std::size_t i = 0; i < frames; ++i) {
            const bool voiced = rng.uniform() < 0.7;
            track.voiced.push_back(voiced ? 1 : 0);
            track.f0_hz.push_back(voiced ? 100.0 + 500.0 * rng.uniform() : 0.0);
        }
        std::vector<AlignedPhone> phones;
        double t = 0.0;
        int syllable = 0;
        while (t < 1.1) {
            const double d = 0.05 + 0.4 * rng.uniform();
            phones.push_back({"p", t, std::min(t + d, 1.2), syllable});
            if (rng.uniform() < 0.6) ++syllable;
            t += d;
        }
        const MusicScore score = build_score(phones, "text", track, "u");
        CHECK(score.size() == score.notes.size());
        CHECK(score.size() == score.note_durations.size());
        CHECK(score.size() == score.phone_durations.size());
        CHECK(score.size() == score.slurs.size());
        for (std::size_t i = 0; i < score.size(); ++i) {
            CHECK(score.note_durations[i] > 0.0);
            CHECK(score.phone_durations[i] > 0.0);
            CHECK((score.slurs[i] == 0 || score.slurs[i] == 1));
            CHECK((score.notes[i] == kRestNote ||
                   (score.notes[i] >= 0 && score.notes[i] <= 127)));
            if (score.slurs[i] == 1) {
                REQUIRE(i > 0);
                CHECK(score.phones[i] == score.phones[i - 1]);
            }
        }
    }
}

TEST_CASE("score text format round trips") {
    MusicScore s;
    s.utterance_id = "demo_001";
    s.text = "la ti";
    s.phones = {"l", "a", "a"};
    s.notes = {57, 57, kRestNote};
    s.note_durations = {0.1, 0.42, 0.2};
    s.phone_durations = {0.1, 0.32, 0.2};
    s.slurs = {0, 0, 1};
    const MusicScore back = parse_score(write_score(s));
    CHECK(back == s);
}

TEST_CASE("randomized score round trips through the text format") {
    Rng rng(99);
    const char* phone_pool[] = {"a", "i", "u", "k", "t", "n", "sil", "AA1", "zh"};
    std::vector<MusicScore> scores;
    for (int trial = 0; trial < 100; ++trial) {
        MusicScore s;
        s.utterance_id = "utt_" + std::to_string(trial);
        s.text = "word" + std::to_string(rng.uniform_int(0, 999));
        const int rows = rng.uniform_int(1, 12);
        for (int r = 0; r < rows; ++r) {
            s.phones.push_back(phone_pool[rng.uniform_int(0, 8)]);
            s.notes.push_back(rng.uniform() < 0.15 ? kRestNote : rng.uniform_int(0, 127));
            // k / 1e6 is the correctly rounded 6-decimal value (1e6 is an
            // exact double), so the %.6f text form round trips bit-exactly.
            s.note_durations.push_back(rng.uniform_int(1, 2000000) / 1e6);
            s.phone_durations.push_back(rng.uniform_int(1, 2000000) / 1e6);
            s.slurs.push_back(r > 0 && rng.uniform() < 0.2 ? 1 : 0);
        }
        CHECK(parse_score(write_score(s)) == s);
        scores.push_back(std::move(s));
    }
    const std::vector<MusicScore> all = parse_score_file(write_score_file(scores));
    CHECK(all == scores);
}

TEST_CASE("parse_score names the line and reason on malformed input") {
    CHECK_THROWS_WITH_AS(parse_score("only|six|fields|a|b|c", 3), doctest::Contains("score line 3"),
                         std::runtime_error);
    // Field length mismatch: 2 notes vs 1 slur flag.
    CHECK_THROWS(parse_score("u|t|p p|60 61|0.1 0.1|0.1 0.1|0"));
    // Non-integer note token.
    CHECK_THROWS(parse_score("u|t|p|sixty|0.1|0.1|0"));
    // Non-positive duration.
    CHECK_THROWS(parse_score("u|t|p|60|0.0|0.1|0"));
    CHECK_THROWS(parse_score("u|t|p|60|-0.1|0.1|0"));
    // Slur flag outside {0,1}.
    CHECK_THROWS(parse_score("u|t|p|60|0.1|0.1|2"));
    // Note out of MIDI range.
    CHECK_THROWS(parse_score("u|t|p|200|0.1|0.1|0"));
    // "rest" is accepted.
    CHECK_NOTHROW(parse_score("u|t|p|rest|0.1|0.1|0"));
}

TEST_CASE("alignment format round trips and validates ordering") {
    std::vector<AlignedPhone> phones = {{"l", 0.0, 0.1, 0}, {"a", 0.1, 0.6, 0}, {"t", 0.6, 0.7, 1}};
    const auto back = parse_alignment(write_alignment(phones));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].phone == phones[i].phone);
        CHECK(back[i].start == doctest::Approx(phones[i].start));
        CHECK(back[i].end == doctest::Approx(phones[i].end));
        CHECK(back[i].syllable_id == phones[i].syllable_id);
    }
    CHECK_THROWS(parse_alignment("a\t0.5\t0.6\t0\nb\t0.1\t0.2\t1\n"));  // unsorted
    CHECK_THROWS(parse_alignment("a\t0.5\t0.4\t0\n"));                   // end <= start
    CHECK_THROWS(parse_alignment("a\t0.5\t0.6\n"));                      // missing field
}
