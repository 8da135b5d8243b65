#pragma once

#include <string>

#include "pbr/series.hpp"

namespace pbr {

/// Writes <stem>.bin (little-endian interleaved re/im float64) and
/// <stem>.json (sidecar with dt, t0, length).
void write_series(const ComplexSeries& series, const std::string& path_stem);

/// Reads the pair written by write_series; throws std::runtime_error on
/// missing files or a length mismatch between sidecar and payload.
ComplexSeries read_series(const std::string& path_stem);

}  // namespace pbr
