#include "pbr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "pbr/batching.hpp"
#include "pbr/random.hpp"

namespace pbr {

namespace {

constexpr std::uint64_t kWaveformStream = 0x77617665ull;
constexpr std::uint64_t kNoiseStream = 0x74726c6eull;

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double rmse(const std::vector<double>& errs) {
    if (errs.empty()) return std::nan("");
    double acc = 0.0;
    for (double e : errs) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errs.size()));
}

}  // namespace

std::string flags_to_string(unsigned flags) {
    static const std::pair<unsigned, const char*> names[] = {
        {kFlagDegeneratePoint, "degenerate-point"},
        {kFlagNonConverged, "non-converged"},
        {kFlagRankDeficient, "rank-deficient"},
        {kFlagUnreliablePhase, "unreliable-phase"},
        {kFlagApproxWarning, "approximation-warning"},
        {kFlagOutsideClutterSpan, "outside-clutter-span"},
        {kFlagEstimatorFailure, "estimator-failure"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (flags & bit) {
            if (!out.empty()) out += "|";
            out += name;
        }
    }
    return out.empty() ? "ok" : out;
}

double EstimatorSettings::coarse_step_or_default(double dt) const {
    return tau_coarse_step > 0.0 ? tau_coarse_step : dt / 2.0;
}

double EstimatorSettings::fine_step_or_default(double dt) const {
    return tau_fine_step > 0.0 ? tau_fine_step : dt / 256.0;
}

TrialPair run_trial(const SceneConfig& cfg, const EstimatorSettings& est,
                    std::uint64_t trial_seed) {
    SceneConfig scene = cfg;
    scene.seed = derive_seed(trial_seed, kNoiseStream);
    // The estimator's cancellation order defines how much reference pre-roll
    // the node records; a zero tap encodes the extent without signal effect.
    if (scene.max_clutter_lag() < est.clutter_order)
        scene.clutter_taps.push_back({est.clutter_order, cdouble(0, 0)});

    const int lag_span = scene.max_clutter_lag();
    const ComplexSeries waveform =
        generate_waveform(static_cast<std::size_t>(scene.n_samples + lag_span),
                          derive_seed(trial_seed, kWaveformStream), scene.dt);
    const NodeSignals node = synthesize_node(scene, waveform);
    const auto batches = make_batches(node, est.n_batches, est.clutter_order);

    unsigned shared_flags = kFlagNone;
    std::vector<ProjectionBasis> bases;
    bases.reserve(batches.size());
    for (const auto& b : batches) {
        bases.push_back(build_basis(b));
        if (bases.back().rank_deficient) shared_flags |= kFlagRankDeficient;
    }

    const double dt = scene.dt;
    const int q_len = batches.front().batch_len;
    const double clutter_span = est.clutter_order * dt;

    TrialPair pair;

    // --- separable path ---
    {
        TrialResult& r = pair.separable;
        r.method = "separable";
        r.flags = shared_flags;
        if (!(cfg.target_delay > 0.0) || cfg.target_delay > clutter_span)
            r.flags |= kFlagOutsideClutterSpan;
        const auto start = std::chrono::steady_clock::now();
        try {
            const DelayEstimate de =
                estimate_delay(batches, bases, est.coarse_step_or_default(dt),
                               est.fine_step_or_default(dt));
            if (de.any_degenerate) r.flags |= kFlagDegeneratePoint;
            const AmplitudeSequence seq = amplitude_sequence(batches, bases, de.tau_hat);
            if (seq.count_reliable() < static_cast<int>(seq.batch_amplitudes.size()))
                r.flags |= kFlagUnreliablePhase;
            const TretterResult tr = tretter_doppler(seq, dt, q_len);
            if (tr.approximation_warning) r.flags |= kFlagApproxWarning;
            r.tau_hat = de.tau_hat;
            r.omega_hat = tr.omega_hat;
            r.tau_err = r.tau_hat - cfg.target_delay;
            r.omega_err = r.omega_hat - cfg.target_doppler;
        } catch (const std::exception&) {
            r.flags |= kFlagEstimatorFailure;
            r.tau_hat = r.omega_hat = std::nan("");
            r.tau_err = r.omega_err = std::nan("");
        }
        r.wall_time_s = elapsed_s(start);
    }

    // --- baseline 2-D path ---
    {
        TrialResult& r = pair.baseline;
        r.method = "baseline2d";
        r.flags = shared_flags;
        const auto start = std::chrono::steady_clock::now();
        try {
            const double lobe = 2.0 * std::numbers::pi / (static_cast<double>(q_len) * dt);
            double half = est.omega_half_span > 0.0 ? est.omega_half_span : 4.0 * lobe;
            half = std::max(half, std::abs(cfg.target_doppler) + lobe);
            SearchBox box{0.0, clutter_span, -half, half};
            std::optional<std::pair<double, double>> init;
            if (est.truth_init_2d) init = {cfg.target_delay, cfg.target_doppler};
            const Estimate2D e2 = estimate_2d(batches, bases, box, init);
            if (!e2.converged) r.flags |= kFlagNonConverged;
            if (e2.degenerate_points) r.flags |= kFlagDegeneratePoint;
            r.tau_hat = e2.tau_hat;
            r.omega_hat = e2.omega_hat;
            r.tau_err = r.tau_hat - cfg.target_delay;
            r.omega_err = r.omega_hat - cfg.target_doppler;
        } catch (const std::exception&) {
            r.flags |= kFlagEstimatorFailure;
            r.tau_hat = r.omega_hat = std::nan("");
            r.tau_err = r.omega_err = std::nan("");
        }
        r.wall_time_s = elapsed_s(start);
    }
    return pair;
}

SweepTable run_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("run_sweep: no swept values");
    if (spec.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");

    SweepTable table;
    table.swept_name =
        spec.variable == SweepVariable::kBatchCount ? "n_batches" : "target_doppler";

    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        const double value = spec.values[vi];
        SceneConfig scene = spec.base;
        EstimatorSettings est = spec.est;
        if (spec.variable == SweepVariable::kBatchCount) {
            est.n_batches = static_cast<int>(value);
            scene.n_samples = spec.base.n_samples * est.n_batches;  // base N is Q
        } else {
            scene.target_doppler = value;
        }
        if (scene.n_samples % est.n_batches != 0) {
            std::fprintf(stderr, "run_sweep: discarding %d tail samples at value %g\n",
                         scene.n_samples % est.n_batches, value);
        }

        const std::uint64_t value_seed = derive_seed(spec.master_seed, vi);
        std::vector<TrialPair> results(static_cast<std::size_t>(spec.trials));
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= spec.trials) break;
                results[static_cast<std::size_t>(t)] =
                    run_trial(scene, est, derive_seed(value_seed, static_cast<std::uint64_t>(t)));
            }
        };
        const int n_threads = std::max(1, spec.threads);
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        SweepRow row;
        row.value = value;
        row.trials = spec.trials;
        std::vector<double> tau_sep, omega_sep, tau_2d, omega_2d;
        double time_sep = 0.0, time_2d = 0.0;
        for (const auto& pr : results) {
            if (pr.separable.flags != kFlagNone) ++row.flagged_separable;
            if (pr.baseline.flags != kFlagNone) ++row.flagged_baseline;
            if (!pr.separable.failed()) {
                tau_sep.push_back(pr.separable.tau_err);
                omega_sep.push_back(pr.separable.omega_err);
            }
            if (!pr.baseline.failed()) {
                tau_2d.push_back(pr.baseline.tau_err);
                omega_2d.push_back(pr.baseline.omega_err);
            }
            time_sep += pr.separable.wall_time_s;
            time_2d += pr.baseline.wall_time_s;
        }
        row.tau_rmse_separable = rmse(tau_sep);
        row.omega_rmse_separable = rmse(omega_sep);
        row.tau_rmse_baseline = rmse(tau_2d);
        row.omega_rmse_baseline = rmse(omega_2d);
        row.separable_time_s = time_sep / spec.trials;
        row.baseline_time_s = time_2d / spec.trials;
        table.rows.push_back(row);
    }
    return table;
}

std::string SweepTable::to_csv() const {
    std::string out = swept_name +
                      ",trials,flagged_separable,flagged_baseline"
                      ",tau_rmse_separable,omega_rmse_separable"
                      ",tau_rmse_baseline,omega_rmse_baseline"
                      ",separable_time_s,baseline_time_s\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%.12g,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.4g,%.4g\n",
                      r.value, r.trials, r.flagged_separable, r.flagged_baseline,
                      r.tau_rmse_separable, r.omega_rmse_separable, r.tau_rmse_baseline,
                      r.omega_rmse_baseline, r.separable_time_s, r.baseline_time_s);
        out += line;
    }
    return out;
}

std::string sweep_gnuplot_script(const std::string& csv_name, const std::string& xlabel) {
    std::string s;
    s += "set datafile separator ','\n";
    s += "set key autotitle columnhead outside\n";
    s += "set logscale y\n";
    s += "set xlabel '" + xlabel + "'\n";
    s += "set ylabel 'RMSE'\n";
    s += "set grid\n";
    s += "set term pngcairo size 900,600\n";
    s += "set output '" + csv_name + ".tau.png'\n";
    s += "plot '" + csv_name + "' using 1:5 with linespoints, '' using 1:7 with linespoints\n";
    s += "set output '" + csv_name + ".omega.png'\n";
    s += "plot '" + csv_name + "' using 1:6 with linespoints, '' using 1:8 with linespoints\n";
    return s;
}

SceneConfig apply_snr_spec(SceneConfig cfg, const SnrSpec& snr, std::uint64_t seed) {
    const double ref = cfg.noise_power > 0.0 ? cfg.noise_power : 1.0;
    auto amp_from_db = [&](double db) { return std::sqrt(ref * std::pow(10.0, db / 10.0)); };

    auto phases = complex_gaussian(2, derive_seed(seed, 0x616d70ull));
    cfg.dpi_amp = amp_from_db(snr.dnr_db) * (phases[0] / std::abs(phases[0]));
    cfg.target_amp = amp_from_db(snr.tnr_db) * (phases[1] / std::abs(phases[1]));

    cfg.clutter_taps.clear();
    if (snr.clutter_order > 0) {
        auto coeffs = complex_gaussian(static_cast<std::size_t>(snr.clutter_order),
                                       derive_seed(seed, 0x636c74ull));
        double total = 0.0;
        for (const auto& c : coeffs) total += std::norm(c);
        const double scale =
            total > 0.0 ? std::sqrt(ref * std::pow(10.0, snr.cnr_db / 10.0) / total) : 0.0;
        for (int l = 1; l <= snr.clutter_order; ++l)
            cfg.clutter_taps.push_back({l, scale * coeffs[static_cast<std::size_t>(l - 1)]});
    }
    return cfg;
}

// ---- JSON configuration ------------------------------------------------------

CliConfig load_cli_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    CliConfig cfg;
    cfg.scene = scene_config_from_json(json_text);

    try {
        if (j.contains("snr")) {
            const auto& s = j["snr"];
            SnrSpec snr;
            snr.dnr_db = s.value("dnr_db", snr.dnr_db);
            snr.cnr_db = s.value("cnr_db", snr.cnr_db);
            snr.tnr_db = s.value("tnr_db", snr.tnr_db);
            snr.clutter_order = s.value("clutter_order", snr.clutter_order);
            cfg.scene = apply_snr_spec(cfg.scene, snr, cfg.scene.seed);
        }
        if (j.contains("processing")) {
            const auto& p = j["processing"];
            cfg.est.n_batches = p.value("n_batches", cfg.est.n_batches);
            cfg.est.clutter_order = p.value("clutter_order", cfg.scene.max_clutter_lag() > 0
                                                                 ? cfg.scene.max_clutter_lag()
                                                                 : cfg.est.clutter_order);
            if (p.contains("tau_coarse_step_samples"))
                cfg.est.tau_coarse_step = p["tau_coarse_step_samples"].get<double>() * cfg.scene.dt;
            if (p.contains("tau_fine_step_samples"))
                cfg.est.tau_fine_step = p["tau_fine_step_samples"].get<double>() * cfg.scene.dt;
            cfg.est.omega_half_span = p.value("omega_half_span", cfg.est.omega_half_span);
            cfg.est.omega_oversample = p.value("omega_oversample", cfg.est.omega_oversample);
            cfg.est.truth_init_2d = p.value("truth_init_2d", cfg.est.truth_init_2d);
        } else if (cfg.scene.max_clutter_lag() > 0) {
            cfg.est.clutter_order = cfg.scene.max_clutter_lag();
        }
        if (j.contains("sweep")) {
            const auto& s = j["sweep"];
            SweepSpec sweep;
            const std::string var = s.value("variable", std::string("batches"));
            if (var == "batches") sweep.variable = SweepVariable::kBatchCount;
            else if (var == "doppler") sweep.variable = SweepVariable::kTargetDoppler;
            else throw std::invalid_argument("config: sweep.variable must be batches|doppler");
            sweep.values = s.at("values").get<std::vector<double>>();
            sweep.trials = s.value("trials", 100);
            sweep.master_seed = s.value("master_seed", std::uint64_t{1});
            sweep.base = cfg.scene;
            sweep.est = cfg.est;
            cfg.sweep = sweep;
        }
        if (j.contains("geometry")) {
            const auto& g = j["geometry"];
            FusionDemoConfig demo;
            const auto io = g.at("io").get<std::vector<double>>();
            demo.geometry.io_pos = {io.at(0), io.at(1)};
            for (const auto& n : g.at("nodes")) {
                const auto p = n.get<std::vector<double>>();
                demo.geometry.node_pos.emplace_back(p.at(0), p.at(1));
            }
            demo.geometry.carrier = g.at("carrier").get<double>();
            demo.geometry.wave_speed = g.value("wave_speed", demo.geometry.wave_speed);
            const auto& t = g.at("target");
            const auto tp = t.at("pos").get<std::vector<double>>();
            const auto tv = t.at("vel").get<std::vector<double>>();
            demo.truth.pos = {tp.at(0), tp.at(1)};
            demo.truth.vel = {tv.at(0), tv.at(1)};
            const auto& xg = g.at("xy_grid");
            demo.xy_grid.x_min = xg.at("x_min").get<double>();
            demo.xy_grid.x_max = xg.at("x_max").get<double>();
            demo.xy_grid.nx = xg.at("nx").get<int>();
            demo.xy_grid.y_min = xg.at("y_min").get<double>();
            demo.xy_grid.y_max = xg.at("y_max").get<double>();
            demo.xy_grid.ny = xg.at("ny").get<int>();
            demo.vel_half_span = g.value("vel_half_span", demo.vel_half_span);
            demo.vel_cells = g.value("vel_cells", demo.vel_cells);
            cfg.fusion = demo;
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return cfg;
}

}  // namespace pbr
