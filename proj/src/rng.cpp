#include "svskit/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace svskit {

std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t basis) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = basis;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<std::uint64_t>(p[i]);
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis) {
    return fnv1a64(text.data(), text.size(), basis);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    unsigned char raw[8];
    for (int i = 0; i < 8; ++i) raw[i] = static_cast<unsigned char>((seed >> (8 * i)) & 0xff);
    std::uint64_t h = fnv1a64(raw, 8);
    return fnv1a64(label, h);
}

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo) throw std::runtime_error("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    // Rejection sampling keeps the draw unbiased.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % span);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return lo + static_cast<int>(x % span);
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

void Rng::fill_gaussian(TensorData& t, double scale) {
    for (double& v : t.data) v = gaussian() * scale;
}

} // namespace svskit
