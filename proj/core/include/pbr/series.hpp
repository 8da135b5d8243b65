#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace pbr {

using cdouble = std::complex<double>;

/// Uniformly sampled complex baseband signal. Sample n sits at t0 + n*dt.
struct ComplexSeries {
    std::vector<cdouble> samples;
    double dt = 1.0;  ///< sample interval, seconds (> 0)
    double t0 = 0.0;  ///< time of the first sample, seconds

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
    double duration() const { return static_cast<double>(samples.size()) * dt; }
};

}  // namespace pbr
