#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pbr/projection.hpp"

namespace pbr {

/// Interference-cleaned delay-Doppler criterion sampled on a grid,
/// aggregated incoherently over batches. values(i, j) belongs to
/// (tau_grid[i], omega_grid[j]) and is always >= 0.
struct AmbiguitySurface {
    std::vector<double> tau_grid;    // seconds, ascending
    std::vector<double> omega_grid;  // rad/s, ascending
    Eigen::MatrixXd values;          // |tau| x |omega|

    std::string to_csv() const;  // header: tau_s,omega_rad_s,value
};

struct SearchBox {
    double tau_min = 0.0, tau_max = 0.0;      // seconds
    double omega_min = 0.0, omega_max = 0.0;  // rad/s
};

struct Estimate2D {
    double tau_hat = 0.0;
    double omega_hat = 0.0;
    double peak_value = 0.0;
    int refine_iterations = 0;
    bool converged = true;
    bool degenerate_points = false;  // any evaluation hit a degenerate denominator
};

/// x_m(tau) with the batch-local Doppler ramp applied:
/// element q = x_m(tau)[q] * e^{j omega q dt}, q = 0..Q-1.
Eigen::VectorXcd steering_vector(const Batch& batch, double tau, double omega);

/// |a^H P y|^2 / (a^H P a) for the complement projector P of `basis`, given a
/// steering vector and data (raw or already projected; P is idempotent).
/// Degenerate denominators (< 1e-12 * |a|^2) yield 0 and set *degenerate.
double normalized_power(const ProjectionBasis& basis, const Eigen::VectorXcd& steering,
                        const Eigen::VectorXcd& data, bool* degenerate = nullptr);

/// Single-batch criterion value at (tau, omega); one projector application
/// per argument.
double ambiguity_point(const Batch& batch, const ProjectionBasis& basis, double tau,
                       double omega, bool* degenerate = nullptr);

/// Sum of per-batch criteria over the grid (incoherent aggregation).
/// Degenerate points contribute zero.
AmbiguitySurface aggregate_surface(const std::vector<Batch>& batches,
                                   const std::vector<ProjectionBasis>& bases,
                                   const std::vector<double>& tau_grid,
                                   const std::vector<double>& omega_grid);

/// Derivative-free simplex maximization of the aggregated criterion. With an
/// init, refines from there; otherwise runs a coarse grid argmax first.
/// Convergence: simplex diameter below (dt*1e-3, 2*pi/(N*dt)*1e-3) per axis;
/// gives up (converged = false) after 500 iterations.
Estimate2D estimate_2d(const std::vector<Batch>& batches,
                       const std::vector<ProjectionBasis>& bases, const SearchBox& box,
                       std::optional<std::pair<double, double>> init = std::nullopt);

/// Default grids: tau step dt/2, omega step 2*pi/(Q*dt*oversample).
std::vector<double> linear_grid(double lo, double hi, double step);

}  // namespace pbr
