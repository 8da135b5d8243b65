#include "pbr/fusion.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pbr {

namespace {

void check_node(const Geometry& geom, int node) {
    if (node < 0 || node >= geom.node_count())
        throw std::invalid_argument("fusion: node index out of range");
}

bool coincides(const Geometry& geom, const Eigen::Vector2d& pos) {
    if ((pos - geom.io_pos).norm() == 0.0) return true;
    for (const auto& n : geom.node_pos)
        if ((pos - n).norm() == 0.0) return true;
    return false;
}

}  // namespace

double XyGrid::cell_dx() const { return nx > 1 ? (x_max - x_min) / (nx - 1) : 0.0; }
double XyGrid::cell_dy() const { return ny > 1 ? (y_max - y_min) / (ny - 1) : 0.0; }
double XyGrid::x_at(int i) const { return nx > 1 ? x_min + i * cell_dx() : x_min; }
double XyGrid::y_at(int j) const { return ny > 1 ? y_min + j * cell_dy() : y_min; }

double bistatic_delay(const Geometry& geom, int node, const Eigen::Vector2d& pos) {
    check_node(geom, node);
    const double r_io = (pos - geom.io_pos).norm();
    const double r_node = (pos - geom.node_pos[node]).norm();
    const double baseline = (geom.io_pos - geom.node_pos[node]).norm();
    if (r_io == 0.0 || r_node == 0.0)
        throw std::invalid_argument("bistatic_delay: target coincides with IO or node");
    return (r_io + r_node - baseline) / geom.wave_speed;
}

double bistatic_doppler(const Geometry& geom, int node, const Eigen::Vector2d& pos,
                        const Eigen::Vector2d& vel) {
    check_node(geom, node);
    const Eigen::Vector2d d_io = pos - geom.io_pos;
    const Eigen::Vector2d d_node = pos - geom.node_pos[node];
    if (d_io.norm() == 0.0 || d_node.norm() == 0.0)
        throw std::invalid_argument("bistatic_doppler: target coincides with IO or node");
    const Eigen::Vector2d direction_sum = d_io.normalized() + d_node.normalized();
    return -(geom.carrier / geom.wave_speed) * direction_sum.dot(vel);
}

double interpolate_profile(const DelayProfile& profile, double tau) {
    const auto& grid = profile.tau_grid;
    if (grid.empty()) return 0.0;
    if (tau < grid.front() || tau > grid.back()) return 0.0;
    const auto it = std::lower_bound(grid.begin(), grid.end(), tau);
    const auto hi = static_cast<std::size_t>(std::distance(grid.begin(), it));
    if (hi == 0) return profile.values.front();
    const double t0 = grid[hi - 1], t1 = grid[hi];
    const double f = t1 > t0 ? (tau - t0) / (t1 - t0) : 0.0;
    return (1.0 - f) * profile.values[hi - 1] + f * profile.values[hi];
}

LocalizationResult localize(const std::vector<DelayProfile>& profiles, const Geometry& geom,
                            const XyGrid& grid) {
    if (profiles.size() != static_cast<std::size_t>(geom.node_count()))
        throw std::invalid_argument("localize: one profile per node required");
    if (grid.nx < 1 || grid.ny < 1) throw std::invalid_argument("localize: empty grid");

    LocalizationResult best;
    best.value = -1.0;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const Eigen::Vector2d pos(grid.x_at(i), grid.y_at(j));
            if (coincides(geom, pos)) continue;  // delay map undefined there
            double sum = 0.0;
            for (int k = 0; k < geom.node_count(); ++k) {
                // Missing samples contribute zero by convention.
                sum += interpolate_profile(profiles[static_cast<std::size_t>(k)],
                                           bistatic_delay(geom, k, pos));
            }
            if (sum > best.value) {
                best.value = sum;
                best.pos = pos;
            }
        }
    }
    best.no_target = best.value <= 0.0;
    return best;
}

VelocityEstimate velocity_from_dopplers(const Geometry& geom, const Eigen::Vector2d& pos,
                                        const std::vector<double>& omega_hats) {
    const int k_count = geom.node_count();
    if (omega_hats.size() != static_cast<std::size_t>(k_count))
        throw std::invalid_argument("velocity_from_dopplers: one Doppler per node required");
    if (k_count < 2)
        throw std::invalid_argument("velocity_from_dopplers: at least 2 nodes required");

    Eigen::MatrixXd a(k_count, 2);
    Eigen::VectorXd b(k_count);
    const double scale = -(geom.carrier / geom.wave_speed);
    for (int k = 0; k < k_count; ++k) {
        const Eigen::Vector2d d_io = pos - geom.io_pos;
        const Eigen::Vector2d d_node = pos - geom.node_pos[k];
        if (d_io.norm() == 0.0 || d_node.norm() == 0.0)
            throw std::invalid_argument("velocity_from_dopplers: position coincides with IO/node");
        const Eigen::Vector2d dir = d_io.normalized() + d_node.normalized();
        a(k, 0) = scale * dir.x();
        a(k, 1) = scale * dir.y();
        b(k) = omega_hats[static_cast<std::size_t>(k)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < 2)
        throw std::invalid_argument(
            "velocity_from_dopplers: direction matrix is rank deficient (collinear geometry)");

    VelocityEstimate est;
    Eigen::Vector2d v = qr.solve(b);
    est.vel = v;
    est.residual_norm = (a * v - b).norm();
    return est;
}

namespace {

double bilinear_surface(const AmbiguitySurface& surf, double tau, double omega) {
    const auto& tg = surf.tau_grid;
    const auto& og = surf.omega_grid;
    if (tg.empty() || og.empty()) return 0.0;
    if (tau < tg.front() || tau > tg.back() || omega < og.front() || omega > og.back())
        return 0.0;
    auto cell = [](const std::vector<double>& g, double v, std::size_t& lo, double& f) {
        const auto it = std::upper_bound(g.begin(), g.end(), v);
        std::size_t hi = static_cast<std::size_t>(std::distance(g.begin(), it));
        hi = std::clamp<std::size_t>(hi, 1, g.size() - 1);
        lo = hi - 1;
        f = g[hi] > g[lo] ? (v - g[lo]) / (g[hi] - g[lo]) : 0.0;
    };
    std::size_t i0, j0;
    double fi, fj;
    cell(tg, tau, i0, fi);
    cell(og, omega, j0, fj);
    const auto i = static_cast<Eigen::Index>(i0);
    const auto j = static_cast<Eigen::Index>(j0);
    return (1 - fi) * ((1 - fj) * surf.values(i, j) + fj * surf.values(i, j + 1)) +
           fi * ((1 - fj) * surf.values(i + 1, j) + fj * surf.values(i + 1, j + 1));
}

}  // namespace

JointEstimate localize_joint(const std::vector<AmbiguitySurface>& surfaces,
                             const Geometry& geom, const XyGrid& pos_grid,
                             double vel_half_span, int vel_cells) {
    if (surfaces.size() != static_cast<std::size_t>(geom.node_count()))
        throw std::invalid_argument("localize_joint: one surface per node required");
    if (pos_grid.nx < 1 || pos_grid.ny < 1 || vel_cells < 1)
        throw std::invalid_argument("localize_joint: empty grid");

    XyGrid vel_grid{-vel_half_span, vel_half_span, vel_cells,
                    -vel_half_span, vel_half_span, vel_cells};

    JointEstimate best;
    best.value = -1.0;
    for (int i = 0; i < pos_grid.nx; ++i) {
        for (int j = 0; j < pos_grid.ny; ++j) {
            const Eigen::Vector2d pos(pos_grid.x_at(i), pos_grid.y_at(j));
            if (coincides(geom, pos)) continue;
            std::vector<double> taus(static_cast<std::size_t>(geom.node_count()));
            for (int k = 0; k < geom.node_count(); ++k)
                taus[static_cast<std::size_t>(k)] = bistatic_delay(geom, k, pos);
            for (int vi = 0; vi < vel_grid.nx; ++vi) {
                for (int vj = 0; vj < vel_grid.ny; ++vj) {
                    const Eigen::Vector2d vel(vel_grid.x_at(vi), vel_grid.y_at(vj));
                    double sum = 0.0;
                    for (int k = 0; k < geom.node_count(); ++k) {
                        const double omega = bistatic_doppler(geom, k, pos, vel);
                        sum += bilinear_surface(surfaces[static_cast<std::size_t>(k)],
                                                taus[static_cast<std::size_t>(k)], omega);
                    }
                    if (sum > best.value) {
                        best.value = sum;
                        best.state.pos = pos;
                        best.state.vel = vel;
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace pbr
