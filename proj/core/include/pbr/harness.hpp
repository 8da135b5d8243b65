#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pbr/fusion.hpp"
#include "pbr/scene.hpp"

namespace pbr {

enum TrialFlag : unsigned {
    kFlagNone = 0,
    kFlagDegeneratePoint = 1u << 0,
    kFlagNonConverged = 1u << 1,
    kFlagRankDeficient = 1u << 2,
    kFlagUnreliablePhase = 1u << 3,
    kFlagApproxWarning = 1u << 4,
    kFlagOutsideClutterSpan = 1u << 5,
    kFlagEstimatorFailure = 1u << 6,
};
std::string flags_to_string(unsigned flags);

struct TrialResult {
    std::string method;       // "separable" or "baseline2d"
    double tau_hat = 0.0;
    double omega_hat = 0.0;
    double tau_err = 0.0;     // estimate - truth (signed)
    double omega_err = 0.0;
    unsigned flags = kFlagNone;
    double wall_time_s = 0.0;

    bool failed() const { return (flags & kFlagEstimatorFailure) != 0; }
};

struct TrialPair {
    TrialResult separable;
    TrialResult baseline;
};

/// Estimator configuration shared by both methods in a paired trial.
struct EstimatorSettings {
    int n_batches = 8;              // M
    int clutter_order = 32;         // L used for cancellation
    double tau_coarse_step = 0.0;   // seconds; 0 = dt/2
    double tau_fine_step = 0.0;     // seconds; 0 = dt/256
    double omega_half_span = 0.0;   // rad/s; 0 = 4 Doppler lobes 2*pi/(Q*dt)
    int omega_oversample = 8;       // grid points per Doppler lobe
    bool truth_init_2d = true;      // start the simplex at the ground truth

    double coarse_step_or_default(double dt) const;
    double fine_step_or_default(double dt) const;
};

/// One paired Monte Carlo trial: synthesizes a scene from trial_seed-derived
/// sub-streams and runs both estimators on the identical data. Estimator
/// errors are converted into flags, never propagated.
TrialPair run_trial(const SceneConfig& cfg, const EstimatorSettings& est,
                    std::uint64_t trial_seed);

/// What an RMSE sweep varies.
enum class SweepVariable {
    kBatchCount,     // M; Q fixed, so N = M*Q grows with M
    kTargetDoppler,  // omega0; N fixed
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::kBatchCount;
    std::vector<double> values;
    int trials = 100;
    SceneConfig base;        // for kBatchCount, n_samples is taken as Q*M per value
    EstimatorSettings est;
    std::uint64_t master_seed = 1;
    int threads = 1;
};

struct SweepRow {
    double value = 0.0;
    int trials = 0;
    int flagged_separable = 0;
    int flagged_baseline = 0;
    double tau_rmse_separable = 0.0;
    double omega_rmse_separable = 0.0;
    double tau_rmse_baseline = 0.0;
    double omega_rmse_baseline = 0.0;
    double separable_time_s = 0.0;  // mean per trial
    double baseline_time_s = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::string swept_name;  // "n_batches" or "target_doppler"

    std::string to_csv() const;
};

/// Runs trials paired-seed per swept value and reduces to RMSE rows.
/// Trials are independent and distributed over spec.threads workers;
/// results are deterministic for a fixed master seed regardless of thread
/// count. Discarded tail samples (N mod M) are reported on stderr.
SweepTable run_sweep(const SweepSpec& spec);

/// gnuplot companion for a sweep CSV (log-y RMSE vs the swept variable).
std::string sweep_gnuplot_script(const std::string& csv_name, const std::string& xlabel);

/// Convenience SNR parameterization: fills amplitudes from ratios relative to
/// noise_power. Clutter taps are drawn once from `seed` at lags 1..order and
/// scaled to the requested total power; phases of b and d are drawn likewise.
struct SnrSpec {
    double dnr_db = 30.0;   // DPI-to-noise
    double cnr_db = 10.0;   // total clutter-to-noise
    double tnr_db = -5.0;   // target-to-noise
    int clutter_order = 32; // L
};
SceneConfig apply_snr_spec(SceneConfig cfg, const SnrSpec& snr, std::uint64_t seed);

/// Top-level CLI/JSON configuration: a SceneConfig at the document root plus
/// optional "snr", "processing", "sweep" and "geometry" sections.
struct FusionDemoConfig {
    Geometry geometry;
    TargetState truth;
    XyGrid xy_grid;
    double vel_half_span = 50.0;
    int vel_cells = 21;
};

struct CliConfig {
    SceneConfig scene;
    EstimatorSettings est;
    std::optional<SweepSpec> sweep;  // base/est filled from this document
    std::optional<FusionDemoConfig> fusion;
};

CliConfig load_cli_config(const std::string& json_text);

}  // namespace pbr
