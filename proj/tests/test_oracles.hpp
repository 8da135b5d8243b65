#pragma once

// Reference implementations used only by tests. Each is an independent route
// to the quantity under test: dense linear algebra instead of factored
// projectors, an explicit DFT instead of kernel interpolation.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pbr/random.hpp"
#include "pbr/series.hpp"

namespace oracle {

// I - X (X^H X)^{-1} X^H, straight from the normal equations.
inline Eigen::MatrixXcd dense_complement_projector(const Eigen::MatrixXcd& x) {
    const auto q = x.rows();
    const Eigen::MatrixXcd gram = x.adjoint() * x;
    return Eigen::MatrixXcd::Identity(q, q) - x * gram.inverse() * x.adjoint();
}

// Circular band-limited shift by delta samples via an explicit O(N^2) DFT
// with signed frequency mapping (Nyquist assigned to -N/2).
inline std::vector<pbr::cdouble> dft_shift(const std::vector<pbr::cdouble>& x,
                                           double delta_samples) {
    const auto n = x.size();
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<pbr::cdouble> spectrum(n), out(n);
    for (std::size_t k = 0; k < n; ++k) {
        pbr::cdouble acc(0, 0);
        for (std::size_t m = 0; m < n; ++m)
            acc += x[m] * std::polar(1.0, -two_pi * double(k) * double(m) / double(n));
        spectrum[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double k_signed =
            k < (n + 1) / 2 ? double(k) : double(k) - double(n);
        spectrum[k] *= std::polar(1.0, -two_pi * k_signed * delta_samples / double(n));
    }
    for (std::size_t m = 0; m < n; ++m) {
        pbr::cdouble acc(0, 0);
        for (std::size_t k = 0; k < n; ++k)
            acc += spectrum[k] * std::polar(1.0, two_pi * double(k) * double(m) / double(n));
        out[m] = acc / double(n);
    }
    return out;
}

// Deterministic complex signal band-limited to |f| <= fraction * Nyquist,
// built directly in the frequency domain.
inline std::vector<pbr::cdouble> bandlimited_signal(std::size_t n, double fraction,
                                                    std::uint64_t seed) {
    const double two_pi = 2.0 * std::numbers::pi;
    const auto coeffs = pbr::complex_gaussian(n, seed);
    std::vector<pbr::cdouble> out(n, pbr::cdouble(0, 0));
    const double k_max = fraction * double(n) / 2.0;
    for (std::size_t m = 0; m < n; ++m) {
        pbr::cdouble acc(0, 0);
        for (std::size_t k = 0; k < n; ++k) {
            const double k_signed = k < (n + 1) / 2 ? double(k) : double(k) - double(n);
            if (std::abs(k_signed) > k_max) continue;
            acc += coeffs[k] * std::polar(1.0, two_pi * double(k) * double(m) / double(n));
        }
        out[m] = acc / std::sqrt(double(n));
    }
    return out;
}

}  // namespace oracle
