#include "pbr/baseline2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace pbr {

namespace {

constexpr double kDegenerateFloor = 1e-12;

void apply_doppler_ramp(Eigen::VectorXcd& v, double omega_dt) {
    if (omega_dt == 0.0) return;
    const cdouble rotor = std::polar(1.0, omega_dt);
    cdouble phase(1.0, 0.0);
    for (Eigen::Index q = 0; q < v.size(); ++q) {
        v[q] *= phase;
        phase *= rotor;
        if ((q & 1023) == 1023) phase /= std::abs(phase);
    }
}

}  // namespace

Eigen::VectorXcd steering_vector(const Batch& batch, double tau, double omega) {
    Eigen::VectorXcd s = delayed_reference(batch, tau);
    apply_doppler_ramp(s, omega * batch.dt());
    return s;
}

double normalized_power(const ProjectionBasis& basis, const Eigen::VectorXcd& steering,
                        const Eigen::VectorXcd& data, bool* degenerate) {
    Eigen::VectorXcd ps = project_out(basis, steering);
    const double den = ps.squaredNorm();
    if (den < kDegenerateFloor * steering.squaredNorm()) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    // <P a, P y> = a^H P y since the complement projector is Hermitian
    // idempotent; `data` may be pre-projected without changing the value.
    const cdouble num = ps.dot(data);
    return std::norm(num) / den;
}

double ambiguity_point(const Batch& batch, const ProjectionBasis& basis, double tau,
                       double omega, bool* degenerate) {
    Eigen::VectorXcd s = steering_vector(batch, tau, omega);
    Eigen::VectorXcd y_clean = project_out(basis, batch.surveillance);
    return normalized_power(basis, s, y_clean, degenerate);
}

AmbiguitySurface aggregate_surface(const std::vector<Batch>& batches,
                                   const std::vector<ProjectionBasis>& bases,
                                   const std::vector<double>& tau_grid,
                                   const std::vector<double>& omega_grid) {
    if (batches.size() != bases.size())
        throw std::invalid_argument("aggregate_surface: batches/bases size mismatch");
    if (tau_grid.empty() || omega_grid.empty())
        throw std::invalid_argument("aggregate_surface: empty grid");

    AmbiguitySurface surf;
    surf.tau_grid = tau_grid;
    surf.omega_grid = omega_grid;
    surf.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tau_grid.size()),
                                        static_cast<Eigen::Index>(omega_grid.size()));

    for (std::size_t m = 0; m < batches.size(); ++m) {
        const Batch& batch = batches[m];
        const ProjectionBasis& basis = bases[m];
        const Eigen::VectorXcd y_clean = project_out(basis, batch.surveillance);
        const double dt = batch.dt();
        for (std::size_t i = 0; i < tau_grid.size(); ++i) {
            const Eigen::VectorXcd x_tau = delayed_reference(batch, tau_grid[i]);
            for (std::size_t j = 0; j < omega_grid.size(); ++j) {
                Eigen::VectorXcd s = x_tau;
                apply_doppler_ramp(s, omega_grid[j] * dt);
                surf.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    normalized_power(basis, s, y_clean, nullptr);
            }
        }
    }
    return surf;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("linear_grid: step must be > 0");
    std::vector<double> g;
    for (double v = lo; v <= hi + 0.5 * step; v += step) g.push_back(std::min(v, hi));
    if (!g.empty() && g.size() >= 2 && g.back() == g[g.size() - 2]) g.pop_back();
    return g;
}

std::string AmbiguitySurface::to_csv() const {
    std::string out = "tau_s,omega_rad_s,value\n";
    char line[96];
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        for (std::size_t j = 0; j < omega_grid.size(); ++j) {
            std::snprintf(line, sizeof line, "%.12g,%.12g,%.12g\n", tau_grid[i], omega_grid[j],
                          values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out += line;
        }
    }
    return out;
}

namespace {

struct Vertex {
    std::array<double, 2> x;  // (tau, omega)
    double f;                 // criterion value (to maximize)
};

}  // namespace

Estimate2D estimate_2d(const std::vector<Batch>& batches,
                       const std::vector<ProjectionBasis>& bases, const SearchBox& box,
                       std::optional<std::pair<double, double>> init) {
    if (batches.empty() || batches.size() != bases.size())
        throw std::invalid_argument("estimate_2d: batches/bases mismatch");
    if (!(box.tau_max >= box.tau_min) || !(box.omega_max >= box.omega_min) ||
        !std::isfinite(box.tau_min) || !std::isfinite(box.tau_max) ||
        !std::isfinite(box.omega_min) || !std::isfinite(box.omega_max))
        throw std::invalid_argument("estimate_2d: search box must be finite");

    const int q_len = batches.front().batch_len;
    const double dt = batches.front().dt();
    const double n_total = static_cast<double>(q_len) * static_cast<double>(batches.size());

    Estimate2D est;

    std::vector<Eigen::VectorXcd> y_clean;
    y_clean.reserve(batches.size());
    for (std::size_t m = 0; m < batches.size(); ++m)
        y_clean.push_back(project_out(bases[m], batches[m].surveillance));

    bool any_degenerate = false;
    auto criterion = [&](double tau, double omega) -> double {
        if (tau < box.tau_min || tau > box.tau_max || omega < box.omega_min ||
            omega > box.omega_max) {
            // Out-of-box vertices are dominated by any feasible one; the
            // distance term still steers reflections back inside.
            double d = 0.0;
            d += std::max({box.tau_min - tau, tau - box.tau_max, 0.0}) / dt;
            d += std::max({box.omega_min - omega, omega - box.omega_max, 0.0}) *
                 (q_len * dt) / (2.0 * std::numbers::pi);
            return -1e30 * (1.0 + d);
        }
        double sum = 0.0;
        for (std::size_t m = 0; m < batches.size(); ++m) {
            Eigen::VectorXcd s = steering_vector(batches[m], tau, omega);
            bool degen = false;
            sum += normalized_power(bases[m], s, y_clean[m], &degen);
            any_degenerate |= degen;
        }
        return sum;
    };

    double tau0, omega0;
    if (init) {
        tau0 = init->first;
        omega0 = init->second;
    } else {
        // Coarse grid argmax before refining.
        const double tau_step = dt / 2.0;
        const double omega_step =
            2.0 * std::numbers::pi / (static_cast<double>(q_len) * dt * 8.0);
        const auto taus = linear_grid(box.tau_min, box.tau_max, tau_step);
        const auto omegas = linear_grid(box.omega_min, box.omega_max, omega_step);
        double best = -1.0;
        tau0 = taus.front();
        omega0 = omegas.front();
        for (double t : taus) {
            for (double w : omegas) {
                double v = criterion(t, w);
                if (v > best) {
                    best = v;
                    tau0 = t;
                    omega0 = w;
                }
            }
        }
    }

    // Nelder-Mead with standard coefficients (reflect 1, expand 2,
    // contract 0.5, shrink 0.5).
    const double scale_tau = dt;
    const double scale_omega =
        2.0 * std::numbers::pi / (10.0 * static_cast<double>(q_len) * dt);
    const double tol_tau = dt * 1e-3;
    const double tol_omega = 2.0 * std::numbers::pi / (n_total * dt) * 1e-3;
    const int max_iter = 500;

    std::array<Vertex, 3> simplex;
    simplex[0] = {{tau0, omega0}, criterion(tau0, omega0)};
    simplex[1] = {{tau0 + scale_tau, omega0}, 0.0};
    simplex[1].f = criterion(simplex[1].x[0], simplex[1].x[1]);
    simplex[2] = {{tau0, omega0 + scale_omega}, 0.0};
    simplex[2].f = criterion(simplex[2].x[0], simplex[2].x[1]);

    auto order = [&]() {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f > b.f; });
    };
    order();

    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        const double diam_tau = std::max({std::abs(simplex[0].x[0] - simplex[1].x[0]),
                                          std::abs(simplex[0].x[0] - simplex[2].x[0]),
                                          std::abs(simplex[1].x[0] - simplex[2].x[0])});
        const double diam_omega = std::max({std::abs(simplex[0].x[1] - simplex[1].x[1]),
                                            std::abs(simplex[0].x[1] - simplex[2].x[1]),
                                            std::abs(simplex[1].x[1] - simplex[2].x[1])});
        if (diam_tau < tol_tau && diam_omega < tol_omega) {
            converged = true;
            break;
        }

        const std::array<double, 2> centroid{(simplex[0].x[0] + simplex[1].x[0]) / 2.0,
                                             (simplex[0].x[1] + simplex[1].x[1]) / 2.0};
        const Vertex& worst = simplex[2];
        auto at = [&](double coef) -> Vertex {
            std::array<double, 2> x{centroid[0] + coef * (centroid[0] - worst.x[0]),
                                    centroid[1] + coef * (centroid[1] - worst.x[1])};
            return {x, criterion(x[0], x[1])};
        };

        Vertex reflected = at(1.0);
        if (reflected.f > simplex[0].f) {
            Vertex expanded = at(2.0);
            simplex[2] = expanded.f > reflected.f ? expanded : reflected;
        } else if (reflected.f > simplex[1].f) {
            simplex[2] = reflected;
        } else {
            Vertex contracted = at(reflected.f > worst.f ? 0.5 : -0.5);
            if (contracted.f > std::max(reflected.f, worst.f)) {
                simplex[2] = contracted;
            } else {
                // Shrink toward the best vertex.
                for (int i = 1; i < 3; ++i) {
                    simplex[i].x[0] = simplex[0].x[0] + 0.5 * (simplex[i].x[0] - simplex[0].x[0]);
                    simplex[i].x[1] = simplex[0].x[1] + 0.5 * (simplex[i].x[1] - simplex[0].x[1]);
                    simplex[i].f = criterion(simplex[i].x[0], simplex[i].x[1]);
                }
            }
        }
        order();
    }

    est.tau_hat = std::clamp(simplex[0].x[0], box.tau_min, box.tau_max);
    est.omega_hat = std::clamp(simplex[0].x[1], box.omega_min, box.omega_max);
    est.peak_value = simplex[0].f;
    est.refine_iterations = iter;
    est.converged = converged;
    est.degenerate_points = any_degenerate;
    return est;
}

}  // namespace pbr
