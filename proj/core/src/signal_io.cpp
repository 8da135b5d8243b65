#include "pbr/signal_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "signal files are little-endian; big-endian hosts are unsupported");

namespace pbr {

void write_series(const ComplexSeries& series, const std::string& path_stem) {
    {
        std::ofstream bin(path_stem + ".bin", std::ios::binary);
        if (!bin) throw std::runtime_error("write_series: cannot open " + path_stem + ".bin");
        for (const auto& z : series.samples) {
            const double re = z.real(), im = z.imag();
            bin.write(reinterpret_cast<const char*>(&re), sizeof re);
            bin.write(reinterpret_cast<const char*>(&im), sizeof im);
        }
        if (!bin) throw std::runtime_error("write_series: short write to " + path_stem + ".bin");
    }
    nlohmann::json sidecar{
        {"dt", series.dt},
        {"t0", series.t0},
        {"length", series.samples.size()},
    };
    std::ofstream js(path_stem + ".json");
    if (!js) throw std::runtime_error("write_series: cannot open " + path_stem + ".json");
    js << sidecar.dump(2) << "\n";
}

ComplexSeries read_series(const std::string& path_stem) {
    std::ifstream js(path_stem + ".json");
    if (!js) throw std::runtime_error("read_series: missing sidecar " + path_stem + ".json");
    nlohmann::json sidecar;
    try {
        js >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_series: bad sidecar: " + std::string(e.what()));
    }

    ComplexSeries series;
    series.dt = sidecar.at("dt").get<double>();
    series.t0 = sidecar.at("t0").get<double>();
    const auto length = sidecar.at("length").get<std::size_t>();

    std::ifstream bin(path_stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("read_series: missing payload " + path_stem + ".bin");
    series.samples.resize(length);
    for (auto& z : series.samples) {
        double re = 0, im = 0;
        bin.read(reinterpret_cast<char*>(&re), sizeof re);
        bin.read(reinterpret_cast<char*>(&im), sizeof im);
        z = {re, im};
    }
    if (!bin) throw std::runtime_error("read_series: payload shorter than sidecar length");
    return series;
}

}  // namespace pbr
