#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace pbr {

/// splitmix64 finalizer; decorrelates nearby integers into well-mixed words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent sub-stream seed from a master seed and a stream tag.
/// Used so that waveform, noise and per-trial draws never share a generator.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream * 0xd6e8feb86659fd93ull + 1));
}

/// Uniform double in [0, 1) built from the top 53 bits; identical on every
/// platform for a given mt19937_64 state.
inline double uniform53(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// i.i.d. circularly-symmetric complex Gaussian samples with E|z|^2 = power.
/// Deterministic bit-for-bit for a given (n, seed).
inline std::vector<std::complex<double>> complex_gaussian(std::size_t n, std::uint64_t seed,
                                                          double power = 1.0) {
    std::vector<std::complex<double>> out(n);
    if (power <= 0.0) return out;
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < n; ++i) {
        // Box-Muller in polar form: one complex sample per uniform pair.
        double u1 = 1.0 - uniform53(gen);  // (0, 1]
        double u2 = uniform53(gen);
        double r = std::sqrt(-power * std::log(u1));
        double phi = 2.0 * std::numbers::pi * u2;
        out[i] = std::complex<double>(r * std::cos(phi), r * std::sin(phi));
    }
    return out;
}

}  // namespace pbr
