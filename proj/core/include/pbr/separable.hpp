#pragma once

#include <string>
#include <vector>

#include "pbr/projection.hpp"

namespace pbr {

/// Doppler-free delay criterion sampled on a tau grid, aggregated over
/// batches. This is the statistic a node transmits in the distributed
/// setting (one value per delay cell instead of one per delay-Doppler cell).
struct DelayProfile {
    std::vector<double> tau_grid;  // seconds, ascending
    std::vector<double> values;    // >= 0

    std::string to_csv() const;  // header: tau_s,value
};

/// Unnormalized per-batch target amplitudes at a fixed delay and their
/// unwrapped phases. Entries with magnitude below the reliability floor are
/// flagged and skipped by the phase regression.
struct AmplitudeSequence {
    std::vector<cdouble> batch_amplitudes;  // d~_m, m = 1..M
    std::vector<double> phases_unwrapped;   // same length
    std::vector<char> reliable;             // 1 = usable phase sample

    int count_reliable() const;
};

struct DelayEstimate {
    double tau_hat = 0.0;
    DelayProfile profile;         // coarse-stage profile (the transmitted artifact)
    bool any_degenerate = false;
};

struct TretterResult {
    double omega_hat = 0.0;  // rad/s
    double slope = 0.0;      // fitted phase increment per batch, rad
    double intercept = 0.0;  // fitted phase at m = 0, rad
    int used_samples = 0;
    bool approximation_warning = false;  // |omega_hat * dt * Q| > 1
};

/// First-order (Doppler-removed) delay criterion for one batch:
/// |x_m(tau)^H D P y_m|^2 / (x_m(tau)^H D P D x_m(tau)), D = diag(0..Q-1),
/// P the interference-complement projector. Requires tau > 0.
double delay_criterion_point(const Batch& batch, const ProjectionBasis& basis, double tau,
                             bool* degenerate = nullptr);

/// Criterion summed over batches on an arbitrary tau grid.
DelayProfile delay_profile(const std::vector<Batch>& batches,
                           const std::vector<ProjectionBasis>& bases,
                           const std::vector<double>& tau_grid);

/// Two-stage 1-D search: coarse grid over [dt, L*dt] (multiples of
/// coarse_step; tau = 0 is excluded because the DPI column makes the
/// criterion degenerate there), then a fine scan of +-coarse_step around the
/// coarse argmax on multiples of fine_step. Throws when the profile carries
/// no target signal (all zero/degenerate).
DelayEstimate estimate_delay(const std::vector<Batch>& batches,
                             const std::vector<ProjectionBasis>& bases, double coarse_step,
                             double fine_step);

/// d~_m = x_m(tau)^H D P y_m for every batch, with phases unwrapped across m
/// (consecutive differences kept in (-pi, pi]).
AmplitudeSequence amplitude_sequence(const std::vector<Batch>& batches,
                                     const std::vector<ProjectionBasis>& bases, double tau_hat);

/// Least-squares line fit to the unwrapped phase sequence over m = 1..M;
/// slope gives the batch-to-batch Doppler phase step, omega_hat = slope/(dt*Q).
/// Unambiguous for |omega| < 2*pi/(Q*dt). Throws std::invalid_argument with
/// fewer than 2 reliable samples.
TretterResult tretter_doppler(const AmplitudeSequence& seq, double dt, int batch_len);

}  // namespace pbr
