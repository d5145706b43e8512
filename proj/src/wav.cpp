#include "svskit/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace svskit {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

std::vector<double> read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open audio file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 44) throw std::runtime_error("not a RIFF/WAVE file (too short): " + path);
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw std::runtime_error("not a RIFF/WAVE file: " + path);
    }

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data_ptr = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        std::uint32_t chunk_len = rd_u32(hdr + 4);
        std::size_t body = pos + 8;
        if (body + chunk_len > bytes.size()) {
            // Tolerate a final chunk whose declared size overruns the file.
            chunk_len = static_cast<std::uint32_t>(bytes.size() - body);
        }
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw std::runtime_error("malformed fmt chunk: " + path);
            format = rd_u16(bytes.data() + body);
            channels = rd_u16(bytes.data() + body + 2);
            rate = rd_u32(bytes.data() + body + 4);
            bits = rd_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_ptr = bytes.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1u);
    }

    if (!have_fmt || data_ptr == nullptr) throw std::runtime_error("missing fmt/data chunk: " + path);
    if (format != 1) throw std::runtime_error("expected PCM enc (format 1), got format " + std::to_string(format) + ": " + path);
    if (bits != 16) throw std::runtime_error("expected 16-bit samples, got " + std::to_string(bits) + "-bit: " + path);
    if (channels != 1) throw std::runtime_error("expected mono audio, got " + std::to_string(channels) + " channels: " + path);
    if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw std::runtime_error("expected 16000 Hz sample rate, got " + std::to_string(rate) + " Hz: " + path);
    }

    std::size_t n = data_len / 2;
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int16_t s = static_cast<std::int16_t>(rd_u16(data_ptr + 2 * i));
        samples[i] = static_cast<double>(s) / 32768.0;
    }
    return samples;
}

void write_wav(const std::string& path, const std::vector<double>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    wr_u32(out, 36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    wr_u32(out, 16);
    wr_u16(out, 1);                                    // PCM
    wr_u16(out, 1);                                    // mono
    wr_u32(out, static_cast<std::uint32_t>(kSampleRate));
    wr_u32(out, static_cast<std::uint32_t>(kSampleRate * 2)); // byte rate
    wr_u16(out, 2);                                    // block align
    wr_u16(out, 16);                                   // bits per sample
    out.write("data", 4);
    wr_u32(out, data_len);
    for (double v : samples) {
        double c = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
        long q = std::lround(c * 32767.0);
        if (q > 32767) q = 32767;
        if (q < -32768) q = -32768;
        wr_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace svskit
