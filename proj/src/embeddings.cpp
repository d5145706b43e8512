#include "svskit/embeddings.hpp"

#include <cmath>
#include <stdexcept>

#include "svskit/rng.hpp"

namespace svskit {

namespace {

TensorData unit_gaussian_vector(std::size_t dim, std::uint64_t seed) {
    TensorData v = TensorData::vector(dim);
    Rng rng(seed);
    rng.fill_gaussian(v);
    double norm = 0.0;
    for (double x : v.data) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        v.data.assign(dim, 0.0);
        v[0] = 1.0;
        return v;
    }
    for (double& x : v.data) x /= norm;
    return v;
}

} // namespace

const char* pseudo_kind_name(PseudoKind kind) {
    switch (kind) {
        case PseudoKind::word: return "word";
        case PseudoKind::phone: return "phone";
        case PseudoKind::mert: return "mert";
        case PseudoKind::vec: return "vec";
    }
    throw std::runtime_error("unknown pseudo-embedding kind");
}

PseudoKind pseudo_kind_from_name(const std::string& name) {
    if (name == "word") return PseudoKind::word;
    if (name == "phone") return PseudoKind::phone;
    if (name == "mert") return PseudoKind::mert;
    if (name == "vec") return PseudoKind::vec;
    throw std::runtime_error("unknown pseudo-embedding kind: " + name);
}

std::size_t pseudo_dim(PseudoKind kind) {
    switch (kind) {
        case PseudoKind::word: return 768;
        case PseudoKind::phone: return 768;
        case PseudoKind::mert: return 1024;
        case PseudoKind::vec: return 1024;
    }
    throw std::runtime_error("unknown pseudo-embedding kind");
}

TensorData pseudo_embedding(PseudoKind kind, const std::string& key, std::uint64_t seed) {
    const std::string label = std::string("pseudo.") + pseudo_kind_name(kind) + ":" + key;
    return unit_gaussian_vector(pseudo_dim(kind), derive_seed(seed, label));
}

TensorData step_embedding(int t, std::size_t dim) {
    if (dim == 0 || dim % 2 != 0) throw std::runtime_error("step embedding dim must be even");
    if (t < 0) throw std::runtime_error("step embedding requires t >= 0");
    TensorData e = TensorData::vector(dim);
    const std::size_t half = dim / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double rate = std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(dim));
        double angle = static_cast<double>(t) / rate;
        e[2 * i] = std::sin(angle);
        e[2 * i + 1] = std::cos(angle);
    }
    return e;
}

TensorData score_token_embedding(const std::string& phone, int note, int slur,
                                 std::uint64_t seed) {
    const std::string label = "score_token:" + phone + "|" + std::to_string(note) + "|" +
                              std::to_string(slur);
    return unit_gaussian_vector(256, derive_seed(seed, label));
}

std::uint64_t audio_digest(std::span<const double> wave) {
    std::uint64_t h = 14695981039346656037ull;
    for (double v : wave) {
        double c = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
        long q = std::lround(c * 32767.0);
        auto s = static_cast<std::int16_t>(q > 32767 ? 32767 : (q < -32768 ? -32768 : q));
        unsigned char b[2] = {static_cast<unsigned char>(s & 0xff),
                              static_cast<unsigned char>((s >> 8) & 0xff)};
        h = fnv1a64(b, 2, h);
    }
    return h;
}

} // namespace svskit
