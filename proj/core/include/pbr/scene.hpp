#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbr/series.hpp"

namespace pbr {

/// One stationary-scatterer echo: an integer-lag copy of the reference.
struct ClutterTap {
    int lag = 1;           ///< l, in samples (1 <= l <= L)
    cdouble coeff{0, 0};   ///< c_l
};

/// Full generative description of a single-node scene.
struct SceneConfig {
    int n_samples = 0;                    ///< N, surveillance record length
    double dt = 1.0;                      ///< sample interval, seconds
    cdouble dpi_amp{0, 0};                ///< b, direct-path amplitude
    std::vector<ClutterTap> clutter_taps; ///< {(l, c_l)}
    cdouble target_amp{0, 0};             ///< d
    double target_delay = 0.0;            ///< tau0, seconds (real-valued)
    double target_doppler = 0.0;          ///< omega0, rad/s
    double noise_power = 0.0;             ///< E|e|^2 per sample
    std::uint64_t seed = 0;

    /// Largest configured clutter lag L (0 when no clutter).
    int max_clutter_lag() const;
    /// Throws std::invalid_argument on violated invariants (lag range, dt, N).
    void validate() const;
};

/// Parse / serialize the documented JSON schema (exact field names:
/// n_samples, dt, dpi_amp, clutter_taps, target_amp, target_delay,
/// target_doppler, noise_power, seed). Amplitudes are {"re":..,"im":..}
/// objects; [re, im] arrays are accepted on input.
SceneConfig scene_config_from_json(const std::string& text);
std::string scene_config_to_json(const SceneConfig& cfg);

/// Reference + surveillance channel pair for one receiver node.
/// reference covers t in [-L*dt, N*dt) so batch clutter columns always have
/// data; surveillance covers [0, N*dt).
struct NodeSignals {
    ComplexSeries reference;
    ComplexSeries surveillance;
};

/// Windowed-sinc interpolation kernel parameters. The same kernel is used by
/// the simulator and by estimator steering vectors, so the delayed-target
/// model and the search grid share one definition of x(t - tau).
inline constexpr int kKernelHalfWidth = 32;
inline constexpr double kKernelBeta = 8.0;

/// Interpolation weights for a delay of `delta` samples. Tap i applies to the
/// input sample shifted by (first_shift + i), i.e.
///   y[n] = sum_i weights[i] * x[n - (first_shift + i)].
struct DelayKernel {
    int first_shift = 0;
    std::vector<double> weights;  // 2*kKernelHalfWidth taps
    double weight_sum = 0.0;      // DC gain of the full kernel
};
DelayKernel make_delay_kernel(double delta_samples);

/// i.i.d. unit-power complex Gaussian waveform; identical seed gives
/// bit-identical output. dt/t0 default to 1/0 and are re-based by the caller.
ComplexSeries generate_waveform(std::size_t n_samples, std::uint64_t seed, double dt = 1.0);

/// Band-limited x(t - tau) on the same sampling grid. Integer multiples of dt
/// reduce to exact sample shifts. Near the record edges the kernel is
/// truncated to available samples and renormalized to unit DC gain; samples
/// with no kernel support at all are zero.
ComplexSeries fractional_delay(const ComplexSeries& x, double tau);

/// Delayed samples evaluated only on grid indices
/// [first_index, first_index + count) of x's grid.
std::vector<cdouble> delayed_window(const ComplexSeries& x, double tau,
                                    std::ptrdiff_t first_index, std::size_t count);

/// Builds one node's reference/surveillance pair from a source waveform of at
/// least N + L samples. Waveform sample 0 becomes the reference sample at
/// t = -L*dt; surveillance[n] = b x(t_n) + sum_l c_l x(t_n - l dt)
///                              + d x(t_n - tau0) e^{j omega0 t_n} + e(t_n).
NodeSignals synthesize_node(const SceneConfig& cfg, const ComplexSeries& waveform);

}  // namespace pbr
