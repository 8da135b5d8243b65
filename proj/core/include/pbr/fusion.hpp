#pragma once

#include <Eigen/Core>
#include <vector>

#include "pbr/baseline2d.hpp"
#include "pbr/separable.hpp"

namespace pbr {

/// Known scenario geometry: one illuminator, K receiver nodes.
struct Geometry {
    Eigen::Vector2d io_pos{0, 0};            // meters
    std::vector<Eigen::Vector2d> node_pos;   // meters, k = 0..K-1
    double carrier = 0.0;                    // omega_c, rad/s
    double wave_speed = 299792458.0;         // m/s

    int node_count() const { return static_cast<int>(node_pos.size()); }
};

struct TargetState {
    Eigen::Vector2d pos{0, 0};  // meters
    Eigen::Vector2d vel{0, 0};  // m/s
};

struct XyGrid {
    double x_min = 0, x_max = 0;
    int nx = 1;
    double y_min = 0, y_max = 0;
    int ny = 1;

    double x_at(int i) const;
    double y_at(int j) const;
    double cell_dx() const;
    double cell_dy() const;
};

struct LocalizationResult {
    Eigen::Vector2d pos{0, 0};
    double value = 0.0;
    bool no_target = false;  // every profile sample along the grid was zero
};

struct VelocityEstimate {
    Eigen::Vector2d vel{0, 0};
    double residual_norm = 0.0;  // rad/s
};

struct JointEstimate {
    TargetState state;
    double value = 0.0;
};

/// Bistatic delay relative to the direct path (the convention in which the
/// DPI sits at tau = 0): (|p-io| + |p-node| - |io-node|) / c. Always >= 0.
double bistatic_delay(const Geometry& geom, int node, const Eigen::Vector2d& pos);

/// Bistatic Doppler, rad/s; positive for a closing target:
/// -(omega_c/c) * (u_io + u_node) . vel with unit vectors pointing from the
/// illuminator/node toward the target.
double bistatic_doppler(const Geometry& geom, int node, const Eigen::Vector2d& pos,
                        const Eigen::Vector2d& vel);

/// Linear interpolation of a transmitted profile; zero outside its support.
double interpolate_profile(const DelayProfile& profile, double tau);

/// Central-node position fix: for each candidate position, sums every node's
/// profile sampled at that node's hypothesized delay, and returns the argmax.
LocalizationResult localize(const std::vector<DelayProfile>& profiles, const Geometry& geom,
                            const XyGrid& grid);

/// With the position fixed, each node's Doppler is linear in the velocity;
/// solves the K x 2 least-squares system. Throws on rank-deficient
/// (collinear) geometry.
VelocityEstimate velocity_from_dopplers(const Geometry& geom, const Eigen::Vector2d& pos,
                                        const std::vector<double>& omega_hats);

/// Reference 4-D search over position x velocity through the full per-node
/// surfaces (bilinear interpolation, zero outside support). Exponentially
/// more expensive than localize(); intended for tiny comparison grids.
JointEstimate localize_joint(const std::vector<AmbiguitySurface>& surfaces,
                             const Geometry& geom, const XyGrid& pos_grid,
                             double vel_half_span, int vel_cells);

}  // namespace pbr
