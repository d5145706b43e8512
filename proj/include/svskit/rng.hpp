#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "svskit/tensor.hpp"

namespace svskit {

/// FNV-1a 64-bit hash; stable across runs and platforms.
std::uint64_t fnv1a64(const void* bytes, std::size_t len,
                      std::uint64_t basis = 14695981039346656037ull);
std::uint64_t fnv1a64(std::string_view text,
                      std::uint64_t basis = 14695981039346656037ull);

/// Mixes a seed with a label so independent streams can be derived from one
/// run seed (e.g. per parameter tensor, per utterance).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Deterministic random source. Gaussians use an explicit Box-Muller
/// transform on top of mt19937_64 rather than std::normal_distribution,
/// whose output sequence is not pinned by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi);

    /// Standard normal sample.
    double gaussian();

    void fill_gaussian(TensorData& t, double scale = 1.0);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace svskit
