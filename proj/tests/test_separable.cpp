#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pbr/baseline2d.hpp"
#include "pbr/separable.hpp"
#include "test_oracles.hpp"
#include "test_scenes.hpp"

using namespace pbr;

namespace {

double dense_delay_criterion(const Eigen::MatrixXcd& projector, const Eigen::VectorXcd& x_tau,
                             const Eigen::VectorXcd& y) {
    Eigen::VectorXcd dx(x_tau.size());
    for (Eigen::Index q = 0; q < x_tau.size(); ++q) dx[q] = double(q) * x_tau[q];
    const cdouble num = (dx.adjoint() * projector * y).value();
    const cdouble den = (dx.adjoint() * projector * dx).value();
    return std::norm(num) / den.real();
}

AmplitudeSequence sequence_from_phases(const std::vector<double>& phases, double mag = 1.0) {
    AmplitudeSequence seq;
    for (double p : phases) {
        seq.batch_amplitudes.push_back(std::polar(mag, p));
        seq.reliable.push_back(1);
    }
    seq.phases_unwrapped = phases;
    return seq;
}

}  // namespace

TEST_CASE("delay criterion vanishes on pure interference") {
    auto built = testscene::build(testscene::default_cfg(256, 6), 2, 60);
    const double y2 = built.batches[0].surveillance.squaredNorm();
    CHECK(delay_criterion_point(built.batches[0], built.bases[0], 2.3) <= 1e-18 * y2);
    CHECK_THROWS_AS(delay_criterion_point(built.batches[0], built.bases[0], 0.0),
                    std::invalid_argument);
}

TEST_CASE("delay criterion matches the dense evaluation") {
    auto cfg = testscene::default_cfg(128, 8);
    cfg.target_amp = {0.5, -0.2};
    cfg.target_delay = 3.7;
    cfg.target_doppler = 0.003;
    cfg.noise_power = 0.4;
    auto built = testscene::build(cfg, 1, 61);
    const auto& b = built.batches[0];
    const Eigen::MatrixXcd dense =
        oracle::dense_complement_projector(b.interference_matrix());
    for (int rep = 0; rep < 10; ++rep) {
        const double tau = 0.45 + 0.71 * rep;
        const double got = delay_criterion_point(b, built.bases[0], tau);
        const double expect =
            dense_delay_criterion(dense, delayed_reference(b, tau), b.surveillance);
        CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("delay_profile equals the sum of per-batch criterion points") {
    auto cfg = testscene::default_cfg(512, 8);
    cfg.target_amp = {0.7, 0.1};
    cfg.target_delay = 4.3;
    cfg.target_doppler = 1e-4;
    cfg.noise_power = 0.2;
    auto built = testscene::build(cfg, 4, 62);

    const auto grid = linear_grid(1.0, 8.0, 0.37);
    const auto profile = delay_profile(built.batches, built.bases, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double expect = 0.0;
        for (std::size_t m = 0; m < built.batches.size(); ++m)
            expect += delay_criterion_point(built.batches[m], built.bases[m], grid[i]);
        CHECK(profile.values[i] == doctest::Approx(expect).epsilon(1e-9));
    }

    // M = 1: the profile is the single-batch criterion.
    const auto single = delay_profile({built.batches[0]}, {built.bases[0]}, grid);
    CHECK(single.values[3] ==
          doctest::Approx(delay_criterion_point(built.batches[0], built.bases[0], grid[3]))
              .epsilon(1e-9));

    const std::string csv = profile.to_csv();
    CHECK(csv.rfind("tau_s,value\n", 0) == 0);
}

TEST_CASE("noiseless delay estimate is exact on the fine grid") {
    auto cfg = testscene::default_cfg(4096, 16, 4e-8);
    cfg.target_amp = {0.9, 0.3};
    cfg.target_delay = 5.0 * cfg.dt;  // on the fine grid
    cfg.target_doppler = 200.0;
    auto built = testscene::build(cfg, 4, 63);

    const auto est = estimate_delay(built.batches, built.bases, cfg.dt / 2.0, cfg.dt / 64.0);
    CHECK(est.tau_hat == doctest::Approx(cfg.target_delay).epsilon(1e-12));

    // Degenerate two-stage search: coarse == fine step.
    const auto single_stage =
        estimate_delay(built.batches, built.bases, cfg.dt / 8.0, cfg.dt / 8.0);
    CHECK(std::abs(single_stage.tau_hat - cfg.target_delay) <= cfg.dt / 8.0);

    // The transmitted profile is the coarse stage.
    CHECK(est.profile.tau_grid.size() == 31);  // [dt, 16 dt] at dt/2

    // A fractional-delay target needs the whole interpolation kernel inside
    // the clutter span (L >= tau0/dt + kernel half-width) for the projector
    // to annihilate it; mid-span with L = 70 satisfies that.
    auto frac = testscene::default_cfg(4096, 70, cfg.dt);
    frac.target_amp = {0.9, 0.3};
    frac.target_doppler = 200.0;
    frac.target_delay = (35.0 + 13.0 / 64.0) * cfg.dt;
    auto built_frac = testscene::build(frac, 4, 63);
    const auto est_frac =
        estimate_delay(built_frac.batches, built_frac.bases, cfg.dt / 2.0, cfg.dt / 64.0);
    CHECK(std::abs(est_frac.tau_hat - frac.target_delay) <= 2.0 * cfg.dt / 64.0);
}

TEST_CASE("estimate_delay reports no-target on an all-zero profile") {
    auto built = testscene::build(testscene::default_cfg(256, 4), 2, 64);
    for (auto& b : built.batches) b.surveillance.setZero();
    CHECK_THROWS_AS(estimate_delay(built.batches, built.bases, 0.5, 0.25), std::runtime_error);
}

TEST_CASE("delay argmax is invariant to complex scaling of the data") {
    auto cfg = testscene::default_cfg(256, 8);
    cfg.target_amp = {0.6, 0.0};
    cfg.target_delay = 5.2;
    cfg.noise_power = 0.3;
    auto built = testscene::build(cfg, 2, 65);

    const auto grid = linear_grid(1.0, 8.0, 0.1);
    const auto base_profile = delay_profile(built.batches, built.bases, grid);
    for (auto& b : built.batches) b.surveillance *= cdouble(1.3, -2.2);
    const auto scaled_profile = delay_profile(built.batches, built.bases, grid);

    const auto argmax = [](const DelayProfile& p) {
        return std::distance(p.values.begin(),
                             std::max_element(p.values.begin(), p.values.end()));
    };
    CHECK(argmax(base_profile) == argmax(scaled_profile));
}

TEST_CASE("amplitude_sequence: noiseless phase steps equal Q*omega0*dt") {
    auto cfg = testscene::default_cfg(2048, 8, 4e-8);
    cfg.target_amp = {0.5, 0.5};
    cfg.target_delay = 3.0 * cfg.dt;
    cfg.target_doppler = 300.0;
    const int m_count = 8;
    auto built = testscene::build(cfg, m_count, 66);

    const auto seq = amplitude_sequence(built.batches, built.bases, cfg.target_delay);
    REQUIRE(int(seq.batch_amplitudes.size()) == m_count);
    CHECK(seq.count_reliable() == m_count);

    const int q_len = built.batches[0].batch_len;
    const double step = cfg.target_doppler * cfg.dt * q_len;  // Omega * dt
    for (int m = 1; m < m_count; ++m) {
        const double got = std::arg(seq.batch_amplitudes[std::size_t(m)] *
                                    std::conj(seq.batch_amplitudes[std::size_t(m - 1)]));
        CHECK(got == doctest::Approx(step).epsilon(0.05));
        // Unwrapped phases keep consecutive differences in (-pi, pi].
        const double diff =
            seq.phases_unwrapped[std::size_t(m)] - seq.phases_unwrapped[std::size_t(m - 1)];
        CHECK(diff > -std::numbers::pi);
        CHECK(diff <= std::numbers::pi);
        // Each unwrapped phase differs from the raw angle by a 2*pi multiple.
        const double k = (seq.phases_unwrapped[std::size_t(m)] -
                          std::arg(seq.batch_amplitudes[std::size_t(m)])) /
                         (2.0 * std::numbers::pi);
        CHECK(std::abs(k - std::round(k)) < 1e-9);
    }
}

TEST_CASE("amplitude_sequence: zero Doppler gives constant phases") {
    // A period-Q waveform makes every batch see the identical window, so the
    // per-batch amplitude is the same complex number whenever omega0 = 0.
    // (Batches touching the record ends see the edge-truncated kernel and are
    // left out of the comparison.)
    const int q_len = 256, m_count = 6, lag_span = 8;
    SceneConfig cfg;
    cfg.n_samples = q_len * m_count;
    cfg.dt = 1.0;
    cfg.dpi_amp = {1.5, -0.5};
    for (int lag = 1; lag <= lag_span; ++lag) cfg.clutter_taps.push_back({lag, {0.1, 0.05}});
    cfg.target_amp = {0.4, 0.7};
    cfg.target_delay = 4.25;  // fractional so the amplitude is nonzero
    cfg.target_doppler = 0.0;

    const auto base = complex_gaussian(std::size_t(q_len), 321);
    ComplexSeries wave;
    wave.dt = 1.0;
    for (int i = 0; i < cfg.n_samples + lag_span; ++i)
        wave.samples.push_back(base[std::size_t(i % q_len)]);

    const auto node = synthesize_node(cfg, wave);
    const auto batches = make_batches(node, m_count, lag_span);
    std::vector<ProjectionBasis> bases;
    for (const auto& b : batches) bases.push_back(build_basis(b));

    const auto seq = amplitude_sequence(batches, bases, cfg.target_delay);
    REQUIRE(seq.count_reliable() == m_count);
    for (std::size_t m = 2; m + 1 < seq.phases_unwrapped.size(); ++m)
        CHECK(std::abs(seq.phases_unwrapped[m] - seq.phases_unwrapped[1]) < 1e-6);
}

TEST_CASE("unwrapping stays monotone across +-pi crossings") {
    // Phase steps of 2.8 rad cross the principal branch repeatedly.
    std::vector<double> true_phases;
    for (int m = 1; m <= 16; ++m) true_phases.push_back(2.8 * m - 1.3);
    AmplitudeSequence seq;
    for (double p : true_phases) {
        seq.batch_amplitudes.push_back(std::polar(2.0, p));  // stored angles are wrapped
        seq.reliable.push_back(1);
    }
    seq.phases_unwrapped.assign(true_phases.size(), 0.0);

    const auto tr = tretter_doppler(seq, 1.0, 4);
    CHECK(tr.omega_hat == doctest::Approx(2.8 / 4.0).epsilon(1e-12));
    CHECK(tr.approximation_warning);  // |slope| = 2.8 > 1

    // The sequence-building unwrap obeys the same rule; rebuild through it.
    std::vector<double> unwrapped{std::arg(seq.batch_amplitudes[0])};
    for (std::size_t m = 1; m < seq.batch_amplitudes.size(); ++m) {
        double d = std::arg(seq.batch_amplitudes[m]) - std::arg(seq.batch_amplitudes[m - 1]);
        d = std::remainder(d, 2.0 * std::numbers::pi);
        if (d <= -std::numbers::pi) d += 2.0 * std::numbers::pi;
        unwrapped.push_back(unwrapped.back() + d);
        CHECK(unwrapped[m] > unwrapped[m - 1]);  // strictly monotone for this step
    }
}

TEST_CASE("tretter_doppler: exact affine phases recover the frequency exactly") {
    std::vector<double> phases;
    for (int m = 1; m <= 4; ++m) phases.push_back(0.3 * m + 1.1);
    const auto seq = sequence_from_phases(phases);
    const auto tr = tretter_doppler(seq, 1.0, 4);
    CHECK(tr.omega_hat == doctest::Approx(0.075).epsilon(1e-14));
    CHECK(tr.intercept == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(tr.used_samples == 4);
    CHECK_FALSE(tr.approximation_warning);
}

TEST_CASE("tretter_doppler skips unreliable samples and needs two good ones") {
    std::vector<double> phases{1.4, 1.7, 99.0, 2.3};  // third entry garbage
    auto seq = sequence_from_phases(phases);
    seq.batch_amplitudes[2] = {1e-300, 0.0};
    seq.reliable[2] = 0;
    const auto tr = tretter_doppler(seq, 1.0, 2);
    CHECK(tr.used_samples == 3);
    CHECK(tr.omega_hat == doctest::Approx(0.3 / 2.0).epsilon(1e-12));

    AmplitudeSequence starved = sequence_from_phases({0.1, 0.2, 0.3});
    starved.reliable = {1, 0, 0};
    CHECK_THROWS_AS(tretter_doppler(starved, 1.0, 2), std::invalid_argument);
}

TEST_CASE("interference-only scenes yield unreliable amplitudes") {
    auto built = testscene::build(testscene::default_cfg(512, 4), 4, 69);
    const auto seq = amplitude_sequence(built.batches, built.bases, 2.0);
    CHECK(seq.count_reliable() == 0);
    CHECK_THROWS_AS(tretter_doppler(seq, 1.0, built.batches[0].batch_len),
                    std::invalid_argument);
}

TEST_CASE("noiseless end-to-end separable estimate hits the mid-regime Doppler") {
    auto cfg = testscene::default_cfg(4096 * 8, 32, 4e-8);
    cfg.target_amp = {0.56, 0.56};
    cfg.target_delay = 17.0 * cfg.dt;
    cfg.target_doppler = 250.0;
    auto built = testscene::build(cfg, 8, 70);  // Q = 2^12

    const auto de = estimate_delay(built.batches, built.bases, cfg.dt / 2.0, cfg.dt / 64.0);
    CHECK(std::abs(de.tau_hat - cfg.target_delay) <= cfg.dt / 64.0 + 1e-15);
    const auto seq = amplitude_sequence(built.batches, built.bases, de.tau_hat);
    const auto tr = tretter_doppler(seq, cfg.dt, built.batches[0].batch_len);
    CHECK(std::abs(tr.omega_hat - cfg.target_doppler) <= 1e-3 * cfg.target_doppler);
}

TEST_CASE("pi/2 offset: fitted intercept sits a quarter turn above angle(d0)") {
    auto cfg = testscene::default_cfg(4096, 16, 4e-8);
    cfg.target_amp = std::polar(0.7, 0.9);
    cfg.target_delay = 6.0 * cfg.dt;
    cfg.target_doppler = 30.0;  // small |omega| Q dt keeps the first-order regime clean
    const int m_count = 8;
    const int q_len = 4096 / m_count;
    auto built = testscene::build(cfg, m_count, 71);

    const auto seq = amplitude_sequence(built.batches, built.bases, cfg.target_delay);
    const auto tr = tretter_doppler(seq, cfg.dt, q_len);

    // d_m = d0 e^{j Omega dt m} with d0 the amplitude extrapolated to m = 0.
    const double omega_step = cfg.target_doppler * q_len * cfg.dt;
    const double angle_d0 = std::arg(cfg.target_amp) - omega_step;
    const double offset =
        std::remainder(tr.intercept - angle_d0 - std::numbers::pi / 2.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(offset) < 1e-3);
}

TEST_CASE("approximation consistency between the 1-D profile and the 2-D surface") {
    auto cfg = testscene::default_cfg(2048, 8, 4e-8);
    cfg.target_amp = {0.8, -0.1};
    cfg.target_delay = 4.0 * cfg.dt + cfg.dt / 8.0;
    const int q_len = 1024;
    cfg.target_doppler = 0.08 / (q_len * cfg.dt);  // |omega0| Q dt = 0.08
    auto built = testscene::build(cfg, 2, 72);

    const double fine = cfg.dt / 8.0;
    const auto tau_grid = linear_grid(fine, 8.0 * cfg.dt, fine);
    const auto profile = delay_profile(built.batches, built.bases, tau_grid);
    const auto surf = aggregate_surface(built.batches, built.bases, tau_grid,
                                        {cfg.target_doppler});

    const auto p_arg = std::distance(profile.values.begin(),
                                     std::max_element(profile.values.begin(),
                                                      profile.values.end()));
    Eigen::Index s_arg = 0, s_col = 0;
    surf.values.maxCoeff(&s_arg, &s_col);
    CHECK(std::abs(double(p_arg) - double(s_arg)) <= 1.0);
}

TEST_CASE("slope noise follows the OLS line-fit law") {
    // sigma = 0.01 rad of phase noise; slope std must track
    // sigma * sqrt(12 / (M (M^2-1))).
    std::mt19937_64 gen(99);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (int m_count : {8, 16, 32, 64}) {
        const int reps = 400;
        double acc = 0.0;
        for (int r = 0; r < reps; ++r) {
            std::vector<double> phases;
            for (int m = 1; m <= m_count; ++m) phases.push_back(0.2 * m + noise(gen));
            const auto tr = tretter_doppler(sequence_from_phases(phases), 1.0, 1);
            const double err = tr.slope - 0.2;
            acc += err * err;
        }
        const double got = std::sqrt(acc / reps);
        const double law = 0.01 * std::sqrt(12.0 / (double(m_count) *
                                                    (double(m_count) * m_count - 1.0)));
        CHECK(got / law > 1.0 / 1.5);
        CHECK(got / law < 1.5);
    }
}
