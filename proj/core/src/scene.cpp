#include "pbr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "pbr/random.hpp"

namespace pbr {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ull;  // scene noise sub-stream tag

double sinc(double u) {
    if (u == 0.0) return 1.0;
    double pu = std::numbers::pi * u;
    return std::sin(pu) / pu;
}

double kaiser(double u) {
    double frac = u / kKernelHalfWidth;
    double arg = 1.0 - frac * frac;
    if (arg <= 0.0) return 0.0;
    static const double i0_beta = std::cyl_bessel_i(0.0, kKernelBeta);
    return std::cyl_bessel_i(0.0, kKernelBeta * std::sqrt(arg)) / i0_beta;
}

}  // namespace

int SceneConfig::max_clutter_lag() const {
    int max_lag = 0;
    for (const auto& tap : clutter_taps) max_lag = std::max(max_lag, tap.lag);
    return max_lag;
}

void SceneConfig::validate() const {
    if (n_samples < 1) throw std::invalid_argument("SceneConfig: n_samples must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("SceneConfig: dt must be > 0");
    if (noise_power < 0.0) throw std::invalid_argument("SceneConfig: noise_power must be >= 0");
    for (const auto& tap : clutter_taps) {
        if (tap.lag < 1) throw std::invalid_argument("SceneConfig: clutter lag must be >= 1");
    }
    // Batch feasibility (L < Q-1) is checked where M is known, in make_batches.
    if (std::abs(target_delay) >= static_cast<double>(n_samples) * dt)
        throw std::invalid_argument("SceneConfig: target_delay outside the record");
}

DelayKernel make_delay_kernel(double delta_samples) {
    DelayKernel k;
    const int w = kKernelHalfWidth;
    const int i0 = static_cast<int>(std::floor(delta_samples));
    const double frac = delta_samples - i0;
    if (frac == 0.0) {
        // Exact integer shift: a single unit tap.
        k.first_shift = i0;
        k.weights = {1.0};
        k.weight_sum = 1.0;
        return k;
    }
    k.first_shift = i0 - w + 1;
    k.weights.resize(2 * w);
    double sum = 0.0;
    for (int i = 0; i < 2 * w; ++i) {
        double u = static_cast<double>(k.first_shift + i) - delta_samples;  // in (-w, w)
        double wgt = sinc(u) * kaiser(u);
        k.weights[i] = wgt;
        sum += wgt;
    }
    // Truncation leaves the DC gain a hair under one; normalize it away so
    // delayed constants stay constants.
    for (auto& wgt : k.weights) wgt /= sum;
    k.weight_sum = 1.0;
    return k;
}

std::vector<cdouble> delayed_window(const ComplexSeries& x, double tau,
                                    std::ptrdiff_t first_index, std::size_t count) {
    const auto n_in = static_cast<std::ptrdiff_t>(x.samples.size());
    const DelayKernel kernel = make_delay_kernel(tau / x.dt);
    const int taps = static_cast<int>(kernel.weights.size());

    std::vector<cdouble> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::ptrdiff_t n = first_index + static_cast<std::ptrdiff_t>(i);
        const std::ptrdiff_t hi = n - kernel.first_shift;  // input index of tap 0
        std::ptrdiff_t t_lo = 0, t_hi = taps;              // tap subrange with data
        if (hi - (taps - 1) < 0) t_hi = std::min<std::ptrdiff_t>(taps, hi + 1);
        if (hi >= n_in) t_lo = hi - n_in + 1;
        if (t_lo >= t_hi) {
            out[i] = cdouble(0, 0);  // no kernel support at all
            continue;
        }
        cdouble acc(0, 0);
        double used_sum = 0.0;
        const bool partial = (t_lo != 0) || (t_hi != taps);
        for (std::ptrdiff_t t = t_lo; t < t_hi; ++t) {
            const double w = kernel.weights[static_cast<std::size_t>(t)];
            acc += w * x.samples[static_cast<std::size_t>(hi - t)];
            used_sum += w;
        }
        if (partial && std::abs(used_sum) > 1e-3 * std::abs(kernel.weight_sum)) {
            acc *= kernel.weight_sum / used_sum;  // restore unit DC gain at the edges
        }
        out[i] = acc;
    }
    return out;
}

ComplexSeries generate_waveform(std::size_t n_samples, std::uint64_t seed, double dt) {
    if (n_samples < 1) throw std::invalid_argument("generate_waveform: n_samples must be >= 1");
    ComplexSeries s;
    s.samples = complex_gaussian(n_samples, seed, 1.0);
    s.dt = dt;
    s.t0 = 0.0;
    return s;
}

ComplexSeries fractional_delay(const ComplexSeries& x, double tau) {
    if (x.samples.empty()) throw std::invalid_argument("fractional_delay: empty series");
    if (!(x.dt > 0.0)) throw std::invalid_argument("fractional_delay: dt must be > 0");
    if (std::abs(tau) >= x.duration())
        throw std::invalid_argument("fractional_delay: |tau| must be below the record length");
    ComplexSeries out;
    out.dt = x.dt;
    out.t0 = x.t0;
    out.samples = delayed_window(x, tau, 0, x.samples.size());
    return out;
}

NodeSignals synthesize_node(const SceneConfig& cfg, const ComplexSeries& waveform) {
    cfg.validate();
    const int n = cfg.n_samples;
    const int lag_span = cfg.max_clutter_lag();
    if (static_cast<int>(waveform.samples.size()) < n + lag_span)
        throw std::invalid_argument("synthesize_node: waveform shorter than N + L");

    NodeSignals node;
    node.reference.dt = cfg.dt;
    node.reference.t0 = -static_cast<double>(lag_span) * cfg.dt;
    node.reference.samples.assign(waveform.samples.begin(),
                                  waveform.samples.begin() + n + lag_span);

    // Target component: band-limited delayed reference with a Doppler ramp
    // referenced to t = 0. Built once over the full record.
    std::vector<cdouble> target;
    if (cfg.target_amp != cdouble(0, 0)) {
        target = delayed_window(node.reference, cfg.target_delay, lag_span, n);
    }

    std::vector<cdouble> noise;
    if (cfg.noise_power > 0.0) {
        noise = complex_gaussian(static_cast<std::size_t>(n),
                                 derive_seed(cfg.seed, kNoiseStream), cfg.noise_power);
    }

    node.surveillance.dt = cfg.dt;
    node.surveillance.t0 = 0.0;
    node.surveillance.samples.assign(static_cast<std::size_t>(n), cdouble(0, 0));

    const cdouble rotor = std::polar(1.0, cfg.target_doppler * cfg.dt);
    cdouble phase(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
        cdouble v = cfg.dpi_amp * node.reference.samples[static_cast<std::size_t>(i + lag_span)];
        for (const auto& tap : cfg.clutter_taps) {
            v += tap.coeff * node.reference.samples[static_cast<std::size_t>(i + lag_span - tap.lag)];
        }
        if (!target.empty()) v += cfg.target_amp * target[static_cast<std::size_t>(i)] * phase;
        if (!noise.empty()) v += noise[static_cast<std::size_t>(i)];
        node.surveillance.samples[static_cast<std::size_t>(i)] = v;
        phase *= rotor;
        if ((i & 1023) == 1023) phase /= std::abs(phase);  // keep the rotor on the unit circle
    }
    return node;
}

// ---- JSON ------------------------------------------------------------------

namespace {

cdouble complex_from_json(const nlohmann::json& j, const char* field) {
    if (j.is_array()) {
        if (j.size() != 2) throw std::invalid_argument(std::string(field) + ": expected [re, im]");
        return {j[0].get<double>(), j[1].get<double>()};
    }
    if (j.is_object()) return {j.at("re").get<double>(), j.at("im").get<double>()};
    if (j.is_number()) return {j.get<double>(), 0.0};
    throw std::invalid_argument(std::string(field) + ": expected {re, im}, [re, im] or number");
}

nlohmann::json complex_to_json(const cdouble& z) {
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace

SceneConfig scene_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scene config: ") + e.what());
    }
    SceneConfig cfg;
    try {
        cfg.n_samples = j.at("n_samples").get<int>();
        cfg.dt = j.at("dt").get<double>();
        if (j.contains("dpi_amp")) cfg.dpi_amp = complex_from_json(j["dpi_amp"], "dpi_amp");
        if (j.contains("clutter_taps")) {
            for (const auto& t : j["clutter_taps"]) {
                ClutterTap tap;
                tap.lag = t.at("lag").get<int>();
                tap.coeff = {t.at("re").get<double>(), t.at("im").get<double>()};
                cfg.clutter_taps.push_back(tap);
            }
        }
        if (j.contains("target_amp")) cfg.target_amp = complex_from_json(j["target_amp"], "target_amp");
        cfg.target_delay = j.value("target_delay", 0.0);
        cfg.target_doppler = j.value("target_doppler", 0.0);
        cfg.noise_power = j.value("noise_power", 0.0);
        cfg.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scene config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string scene_config_to_json(const SceneConfig& cfg) {
    nlohmann::json taps = nlohmann::json::array();
    for (const auto& t : cfg.clutter_taps) {
        taps.push_back({{"lag", t.lag}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
    }
    nlohmann::json j{
        {"n_samples", cfg.n_samples},
        {"dt", cfg.dt},
        {"dpi_amp", complex_to_json(cfg.dpi_amp)},
        {"clutter_taps", taps},
        {"target_amp", complex_to_json(cfg.target_amp)},
        {"target_delay", cfg.target_delay},
        {"target_doppler", cfg.target_doppler},
        {"noise_power", cfg.noise_power},
        {"seed", cfg.seed},
    };
    return j.dump(2);
}

}  // namespace pbr
