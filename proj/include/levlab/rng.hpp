#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace levlab {

// Counter-based generator: every draw is a pure function of (seed, stream keys),
// so parallel evaluation order cannot change the noise realization.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(seed ^ 0xA5A5A5A55A5A5A5Aull);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return mix64(h ^ c);
}

inline double uniform01(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Standard complex Gaussian draw (E|z|^2 = 1) keyed on (seed, a, b).
inline std::complex<double> gaussian_cplx(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    const double u1 = 1.0 - uniform01(counter_hash(seed, a, b, 0));  // (0, 1]
    const double u2 = uniform01(counter_hash(seed, a, b, 1));
    const double r = std::sqrt(-2.0 * std::log(u1)) * 0x1.6a09e667f3bcdp-1;  // 1/sqrt(2)
    const double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace levlab
