#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "svskit/wav.hpp"

using namespace svskit;

namespace {
std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
} // namespace

TEST_CASE("wav round trip preserves 16-bit quantized samples") {
    std::vector<double> wave(320);
    for (std::size_t i = 0; i < wave.size(); ++i) {
        wave[i] = 0.5 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / kSampleRate);
    }
    const std::string path = temp_path("svskit_roundtrip.wav");
    write_wav(path, wave);
    const std::vector<double> back = read_wav(path);
    REQUIRE(back.size() == wave.size());
    for (std::size_t i = 0; i < wave.size(); ++i) {
        // Quantization error is at most half a step of 1/32768.
        CHECK(std::abs(back[i] - wave[i]) <= 0.5 / 32768.0 + 1.0 / 32768.0);
    }
    std::remove(path.c_str());
}

TEST_CASE("write_wav clamps out-of-range samples") {
    const std::string path = temp_path("svskit_clamp.wav");
    write_wav(path, std::vector<double>{2.0, -2.0, 0.0});
    const std::vector<double> back = read_wav(path);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == 32767.0 / 32768.0);
    CHECK(back[1] == -32767.0 / 32768.0);
    CHECK(back[2] == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("read_wav rejects malformed and unsupported files") {
    const std::string path = temp_path("svskit_badwav.wav");
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a riff file at all";
    }
    CHECK_THROWS(read_wav(path));
    CHECK_THROWS(read_wav(temp_path("svskit_nonexistent.wav")));
    std::remove(path.c_str());
}

TEST_CASE("read_wav rejects a wrong sample rate with a clear message") {
    // Hand-built minimal RIFF at 8 kHz.
    const std::string path = temp_path("svskit_8k.wav");
    {
        std::ofstream out(path, std::ios::binary);
        auto u32 = [&](std::uint32_t v) {
            char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
            out.write(b, 4);
        };
        auto u16 = [&](std::uint16_t v) {
            char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
            out.write(b, 2);
        };
        out << "RIFF";
        u32(36 + 2);
        out << "WAVEfmt ";
        u32(16);
        u16(1);      // PCM
        u16(1);      // mono
        u32(8000);   // sample rate
        u32(16000);  // byte rate
        u16(2);      // block align
        u16(16);     // bits
        out << "data";
        u32(2);
        u16(0);
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(read_wav(path)), doctest::Contains("16000"),
                         std::runtime_error);
    std::remove(path.c_str());
}
