#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "svskit/fft.hpp"
#include "svskit/rng.hpp"

using namespace svskit;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("fft of an impulse is flat") {
    std::vector<std::complex<double>> x(8, {0.0, 0.0});
    x[0] = {1.0, 0.0};
    fft_inplace(x, false);
    for (const auto& v : x) {
        CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.imag() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("fft resolves a single complex exponential into one bin") {
    const std::size_t n = 64;
    const std::size_t k = 5;
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = 2.0 * kPi * static_cast<double>(k * i) / static_cast<double>(n);
        x[i] = {std::cos(phi), std::sin(phi)};
    }
    fft_inplace(x, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double expected = (i == k) ? static_cast<double>(n) : 0.0;
        CHECK(std::abs(x[i] - std::complex<double>(expected, 0.0)) < 1e-9);
    }
}

TEST_CASE("inverse fft undoes the forward transform") {
    Rng rng(11);
    std::vector<std::complex<double>> x(128);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    const auto original = x;
    fft_inplace(x, false);
    fft_inplace(x, true);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(x[i] - original[i]) < 1e-12);
    }
}

TEST_CASE("fft preserves energy (Parseval)") {
    Rng rng(5);
    std::vector<std::complex<double>> x(256);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = {rng.gaussian(), 0.0};
        time_energy += std::norm(v);
    }
    fft_inplace(x, false);
    double freq_energy = 0.0;
    for (const auto& v : x) freq_energy += std::norm(v);
    CHECK(freq_energy / static_cast<double>(x.size()) ==
          doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("fft rejects non-power-of-two lengths") {
    std::vector<std::complex<double>> x(6);
    CHECK_THROWS(fft_inplace(x, false));
    std::vector<std::complex<double>> empty;
    CHECK_THROWS(fft_inplace(empty, false));
}
