#include "pbr/separable.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace pbr {

namespace {

constexpr double kDegenerateFloor = 1e-12;

Eigen::VectorXcd ramp_weighted(const Eigen::VectorXcd& v) {
    Eigen::VectorXcd w(v.size());
    for (Eigen::Index q = 0; q < v.size(); ++q) w[q] = static_cast<double>(q) * v[q];
    return w;
}

double wrap_to_pi(double x) {
    double w = std::remainder(x, 2.0 * std::numbers::pi);
    if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
    return w;
}

// Per-batch evaluator that amortizes the projector over a whole tau scan.
// x_m(tau) is a fixed linear combination of integer-shift reference columns,
// so with C holding the ramp-weighted shift columns and h(tau) the
// interpolation weights,
//   numerator   = |h^T (C^H P y_m)|^2      (vector g, precomputed)
//   denominator = h^T (C^H P C) h          (Gram matrix, precomputed)
// identical (in exact arithmetic) to the direct evaluation. Batches whose
// shift columns would cross the reference record edges, where the kernel is
// renormalized, fall back to the direct path sample-for-sample.
class DelayCriterionScan {
public:
    DelayCriterionScan(const Batch& batch, const ProjectionBasis& basis, double tau_max)
        : batch_(batch), basis_(basis) {
        y_clean_ = project_out(basis, batch.surveillance);

        const int w = kKernelHalfWidth;
        shift_min_ = -w;
        shift_max_ = static_cast<int>(std::ceil(tau_max / batch.dt())) + w;
        const auto first = static_cast<std::ptrdiff_t>(batch.preroll + batch.q_offset);
        const std::ptrdiff_t lo_index = first - shift_max_;
        const std::ptrdiff_t hi_index = first + batch.batch_len - 1 - shift_min_;
        fast_ = lo_index >= 0 &&
                hi_index < static_cast<std::ptrdiff_t>(batch.reference->size());
        if (!fast_) return;

        const int n_shifts = shift_max_ - shift_min_ + 1;
        Eigen::MatrixXcd cols(batch.batch_len, n_shifts);
        for (int s = 0; s < n_shifts; ++s) {
            const int shift = shift_min_ + s;
            for (int q = 0; q < batch.batch_len; ++q) {
                cols(q, s) = static_cast<double>(q) *
                             batch.reference->samples[static_cast<std::size_t>(first + q - shift)];
            }
        }
        g_ = cols.adjoint() * y_clean_;
        Eigen::MatrixXcd coef = basis.basis.adjoint() * cols;     // U^H C
        Eigen::MatrixXcd projected = cols - basis.basis * coef;   // P C
        gram_proj_ = projected.adjoint() * projected;
        gram_coef_ = coef.adjoint() * coef;  // so that C^H C = gram_proj + gram_coef
    }

    double value(double tau, const DelayKernel& kernel, bool* degenerate) const {
        if (!fast_) {
            return delay_criterion_point(batch_, basis_, tau, degenerate);
        }
        const int taps = static_cast<int>(kernel.weights.size());
        const int base = kernel.first_shift - shift_min_;
        Eigen::Map<const Eigen::VectorXd> h(kernel.weights.data(), taps);

        const cdouble num = (h.transpose() * g_.segment(base, taps)).value();
        Eigen::VectorXcd gh = gram_proj_.block(base, base, taps, taps) * h;
        const double den = (h.transpose() * gh.real()).value();
        Eigen::VectorXcd ch = gram_coef_.block(base, base, taps, taps) * h;
        const double full = den + (h.transpose() * ch.real()).value();  // |D x(tau)|^2

        if (den < kDegenerateFloor * full) {
            if (degenerate) *degenerate = true;
            return 0.0;
        }
        return std::norm(num) / den;
    }

private:
    const Batch& batch_;
    const ProjectionBasis& basis_;
    Eigen::VectorXcd y_clean_;
    bool fast_ = false;
    int shift_min_ = 0, shift_max_ = 0;
    Eigen::VectorXcd g_;
    Eigen::MatrixXcd gram_proj_;
    Eigen::MatrixXcd gram_coef_;
};

std::vector<double> anchored_grid(double lo, double hi, double step) {
    std::vector<double> g;
    const auto i_min = static_cast<long long>(std::ceil(lo / step - 1e-9));
    const auto i_max = static_cast<long long>(std::floor(hi / step + 1e-9));
    g.reserve(static_cast<std::size_t>(std::max(0ll, i_max - i_min + 1)));
    for (long long i = i_min; i <= i_max; ++i) g.push_back(static_cast<double>(i) * step);
    return g;
}

}  // namespace

double delay_criterion_point(const Batch& batch, const ProjectionBasis& basis, double tau,
                             bool* degenerate) {
    if (!(tau > 0.0)) throw std::invalid_argument("delay_criterion_point: tau must be > 0");
    Eigen::VectorXcd w = ramp_weighted(delayed_reference(batch, tau));
    Eigen::VectorXcd y_clean = project_out(basis, batch.surveillance);
    Eigen::VectorXcd pw = project_out(basis, w);
    const double den = pw.squaredNorm();  // x^H D P D x
    if (den < kDegenerateFloor * w.squaredNorm()) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const cdouble num = w.dot(y_clean);  // x^H D P y
    return std::norm(num) / den;
}

DelayProfile delay_profile(const std::vector<Batch>& batches,
                           const std::vector<ProjectionBasis>& bases,
                           const std::vector<double>& tau_grid) {
    if (batches.size() != bases.size())
        throw std::invalid_argument("delay_profile: batches/bases size mismatch");
    if (tau_grid.empty()) throw std::invalid_argument("delay_profile: empty grid");

    DelayProfile profile;
    profile.tau_grid = tau_grid;
    profile.values.assign(tau_grid.size(), 0.0);

    const double dt = batches.front().dt();
    const double tau_max = *std::max_element(tau_grid.begin(), tau_grid.end());
    std::vector<DelayCriterionScan> scans;
    scans.reserve(batches.size());
    for (std::size_t m = 0; m < batches.size(); ++m)
        scans.emplace_back(batches[m], bases[m], tau_max);

    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        const DelayKernel kernel = make_delay_kernel(tau_grid[i] / dt);
        double sum = 0.0;
        for (const auto& scan : scans) sum += scan.value(tau_grid[i], kernel, nullptr);
        profile.values[i] = sum;
    }
    return profile;
}

DelayEstimate estimate_delay(const std::vector<Batch>& batches,
                             const std::vector<ProjectionBasis>& bases, double coarse_step,
                             double fine_step) {
    if (batches.empty()) throw std::invalid_argument("estimate_delay: no batches");
    if (!(fine_step > 0.0) || coarse_step < fine_step)
        throw std::invalid_argument("estimate_delay: need coarse_step >= fine_step > 0");

    const double dt = batches.front().dt();
    const double span = batches.front().clutter_order * dt;
    const auto coarse_grid = anchored_grid(dt, span, coarse_step);
    if (coarse_grid.empty())
        throw std::invalid_argument("estimate_delay: empty coarse grid; L too small");

    DelayEstimate est;
    const double tau_max = span;
    std::vector<DelayCriterionScan> scans;
    scans.reserve(batches.size());
    for (std::size_t m = 0; m < batches.size(); ++m)
        scans.emplace_back(batches[m], bases[m], tau_max);

    auto evaluate = [&](const std::vector<double>& grid, std::vector<double>& values) {
        values.assign(grid.size(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const DelayKernel kernel = make_delay_kernel(grid[i] / dt);
            double sum = 0.0;
            for (const auto& scan : scans) {
                bool degen = false;
                sum += scan.value(grid[i], kernel, &degen);
                est.any_degenerate |= degen;
            }
            values[i] = sum;
        }
    };

    est.profile.tau_grid = coarse_grid;
    evaluate(coarse_grid, est.profile.values);

    const auto best_coarse = std::distance(
        est.profile.values.begin(),
        std::max_element(est.profile.values.begin(), est.profile.values.end()));
    if (est.profile.values[static_cast<std::size_t>(best_coarse)] <= 0.0)
        throw std::runtime_error("estimate_delay: no target signal in the delay profile");

    const double center = coarse_grid[static_cast<std::size_t>(best_coarse)];
    const double lo = std::max(fine_step, center - coarse_step);
    const double hi = std::min(span, center + coarse_step);
    const auto fine_grid = anchored_grid(lo, hi, fine_step);
    std::vector<double> fine_values;
    evaluate(fine_grid, fine_values);
    const auto best_fine = std::distance(fine_values.begin(),
                                         std::max_element(fine_values.begin(), fine_values.end()));
    est.tau_hat = fine_grid[static_cast<std::size_t>(best_fine)];
    return est;
}

AmplitudeSequence amplitude_sequence(const std::vector<Batch>& batches,
                                     const std::vector<ProjectionBasis>& bases,
                                     double tau_hat) {
    if (batches.empty() || batches.size() != bases.size())
        throw std::invalid_argument("amplitude_sequence: batches/bases mismatch");
    if (!(tau_hat > 0.0))
        throw std::invalid_argument("amplitude_sequence: tau_hat must be > 0");

    AmplitudeSequence seq;
    const std::size_t m_count = batches.size();
    seq.batch_amplitudes.resize(m_count);
    seq.phases_unwrapped.resize(m_count);
    seq.reliable.assign(m_count, 1);

    for (std::size_t m = 0; m < m_count; ++m) {
        Eigen::VectorXcd w = ramp_weighted(delayed_reference(batches[m], tau_hat));
        Eigen::VectorXcd y_clean = project_out(bases[m], batches[m].surveillance);
        const cdouble amp = w.dot(y_clean);
        seq.batch_amplitudes[m] = amp;
        const double floor = 1e-12 * batches[m].surveillance.norm() * w.norm();
        if (std::abs(amp) < floor) seq.reliable[m] = 0;
    }

    double prev_raw = 0.0, prev_unwrapped = 0.0;
    bool have_prev = false;
    for (std::size_t m = 0; m < m_count; ++m) {
        const double raw = std::arg(seq.batch_amplitudes[m]);
        if (!have_prev) {
            seq.phases_unwrapped[m] = raw;
            have_prev = true;
        } else {
            seq.phases_unwrapped[m] = prev_unwrapped + wrap_to_pi(raw - prev_raw);
        }
        prev_raw = raw;
        prev_unwrapped = seq.phases_unwrapped[m];
    }
    return seq;
}

int AmplitudeSequence::count_reliable() const {
    int n = 0;
    for (char c : reliable) n += (c != 0);
    return n;
}

TretterResult tretter_doppler(const AmplitudeSequence& seq, double dt, int batch_len) {
    if (!(dt > 0.0) || batch_len < 1)
        throw std::invalid_argument("tretter_doppler: bad dt or batch length");
    const std::size_t m_count = seq.batch_amplitudes.size();

    // Regression samples: reliable entries only, unwrapped across the
    // reliable subsequence so a near-zero amplitude cannot wreck the branch
    // selection of everything after it.
    std::vector<double> ms, phis;
    double prev_raw = 0.0, prev_unwrapped = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        if (!seq.reliable[m]) continue;
        const double raw = std::arg(seq.batch_amplitudes[m]);
        double unwrapped;
        if (ms.empty()) {
            unwrapped = raw;
        } else {
            unwrapped = prev_unwrapped + wrap_to_pi(raw - prev_raw);
        }
        ms.push_back(static_cast<double>(m + 1));  // batches are 1-based
        phis.push_back(unwrapped);
        prev_raw = raw;
        prev_unwrapped = unwrapped;
    }
    if (ms.size() < 2)
        throw std::invalid_argument("tretter_doppler: fewer than 2 reliable phase samples");

    const auto n = static_cast<double>(ms.size());
    double mean_m = 0.0, mean_phi = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        mean_m += ms[i];
        mean_phi += phis[i];
    }
    mean_m /= n;
    mean_phi /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        sxx += (ms[i] - mean_m) * (ms[i] - mean_m);
        sxy += (ms[i] - mean_m) * (phis[i] - mean_phi);
    }

    TretterResult res;
    res.slope = sxy / sxx;                       // Omega * dt
    res.intercept = mean_phi - res.slope * mean_m;
    res.omega_hat = res.slope / (dt * static_cast<double>(batch_len));
    res.used_samples = static_cast<int>(ms.size());
    res.approximation_warning = std::abs(res.slope) > 1.0;  // |omega dt Q| > 1
    return res;
}

std::string DelayProfile::to_csv() const {
    std::string out = "tau_s,value\n";
    char line[64];
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        std::snprintf(line, sizeof line, "%.12g,%.12g\n", tau_grid[i], values[i]);
        out += line;
    }
    return out;
}

}  // namespace pbr
