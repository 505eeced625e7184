#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gisc/config.hpp"
#include "gisc/criterion.hpp"
#include "gisc/genimp.hpp"
#include "gisc/grid.hpp"
#include "gisc/output.hpp"
#include "gisc/sim.hpp"
#include "gisc/vsc.hpp"

namespace gisc {

constexpr const char* kToolVersion = "0.1.0";

struct RunArtifacts {
    std::filesystem::path dir;
    std::vector<std::string> files;
    nlohmann::json summary;
};

struct SweepOptions {
    std::string parameter = "kp_pll";  ///< kp_pll | ki_pll (sweep-pll) / l_line_pu (sweep-line)
    std::vector<double> values;
};

struct SimulateOptions {
    double t_end = 8.0;
    double dt = 2e-5;
    int store_every = 10;
    double event_time = 2.0;       ///< < 0 disables the line step
    double event_l_line = 0.26;
    double perturb_theta = 0.0;    ///< initial PLL-angle offset, rad
    std::optional<double> window_t0;
    std::optional<double> window_t1;
    std::string signal = "u_mag";
};

struct VerifyOptions {
    int points = 100;
    unsigned seed = 12345;
};

struct RunOptions {
    bool svg = false;
    SweepOptions sweep;
    SimulateOptions sim;
    VerifyOptions verify;
};

namespace detail {

struct SystemBits {
    OperatingPoint op;
    RationalFunction yg;
    SwingMatrix y;
    SequencePair seq;
};

inline SystemBits make_system(const Config& cfg) {
    SystemBits s;
    const VscParams vsc = cfg.vsc();
    const GridParams grid = cfg.grid();
    s.op = solve_operating_point(vsc, grid);
    s.yg = build_vsc_admittance(vsc, s.op).yg;
    s.y = total_network_admittance(build_line_admittance(grid, s.op), build_cap_admittance(grid, s.op));
    s.seq = sequence_decompose(s.y);
    return s;
}

inline void emit(RunArtifacts& art, const std::string& name, const std::string& content) {
    write_text_file(art.dir / name, content);
    art.files.push_back(name);
}

inline void emit_manifest(RunArtifacts& art, const std::string& command, const Config& cfg) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = config_hash(cfg);
    manifest["tool_version"] = kToolVersion;
    std::vector<std::string> files = art.files;
    std::sort(files.begin(), files.end());
    manifest["outputs"] = files;
    emit(art, "manifest.json", manifest.dump(2) + "\n");
}

inline std::string verdict_json(const NyquistReport& rep) {
    nlohmann::json j;
    j["verdict"] = to_string(rep.verdict);
    j["winding_number"] = rep.winding_number;
    j["margin"] = rep.margin;
    j["rhp_pole_count"] = rep.rhp_pole_count;
    j["rhp_open_loop_poles"] = rep.rhp_open_loop_poles;
    j["samples"] = rep.samples.size();
    return j.dump(2) + "\n";
}

inline std::string nyquist_svg(const NyquistReport& rep) {
    double extent = 2.5;
    SvgPlot plot(-extent, extent, -extent, extent);
    plot.axes();
    plot.circle(0.0, 0.0, 1.0, "#88aadd");  // unit circle
    std::vector<std::pair<double, double>> pts;
    pts.reserve(rep.samples.size());
    for (const NyquistSample& s : rep.samples) pts.emplace_back(s.value.real(), s.value.imag());
    plot.polyline(pts, "#202020");
    plot.marker(-1.0, 0.0, "critical-point");
    return plot.finish();
}

}  // namespace detail

inline RunArtifacts run_nyquist(const Config& cfg, const RunOptions& opt, const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    detail::SystemBits sys = detail::make_system(cfg);
    NyquistReport rep = assess_stability(sys.yg, sys.seq);

    CsvBuilder csv({"omega_rad_s", "re", "im"});
    for (const NyquistSample& s : rep.samples) csv.row({s.omega, s.value.real(), s.value.imag()});
    detail::emit(art, "curve.csv", csv.str());
    detail::emit(art, "verdict.json", detail::verdict_json(rep));
    if (opt.svg) detail::emit(art, "nyquist.svg", detail::nyquist_svg(rep));
    detail::emit_manifest(art, "nyquist", cfg);
    art.summary["verdict"] = to_string(rep.verdict);
    art.summary["margin"] = rep.margin;
    return art;
}

inline RunArtifacts run_roots(const Config& cfg, const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    detail::SystemBits sys = detail::make_system(cfg);
    RationalFunction l = open_loop_gain(sys.yg, sys.seq);
    ClosedLoopRoots roots = closed_loop_roots(l, cfg.f0_hz);

    CsvBuilder csv({"re", "im", "f_sync_hz", "f_sub_hz", "f_super_hz"});
    for (const Complex& z : roots.roots) {
        const double f_sync = std::abs(z.imag()) / (2.0 * std::numbers::pi);
        csv.row({z.real(), z.imag(), f_sync, cfg.f0_hz - f_sync, cfg.f0_hz + f_sync});
    }
    detail::emit(art, "roots.csv", csv.str());
    detail::emit_manifest(art, "roots", cfg);
    art.summary["rhp_count"] = roots.rhp_roots.size();
    return art;
}

inline RunArtifacts run_eig(const Config& cfg, const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    SystemModel model = assemble_model(cfg.vsc(), cfg.grid());
    std::vector<Complex> ev = eigenvalues(linearize_numeric(model));

    CsvBuilder csv({"re", "im"});
    for (const Complex& z : ev) csv.row({z.real(), z.imag()});
    detail::emit(art, "eig.csv", csv.str());
    detail::emit_manifest(art, "eig", cfg);
    art.summary["n_states"] = model.n_states();
    return art;
}

namespace detail {

inline std::string sweep_csv(const std::string& parameter, const std::vector<double>& values,
                             const Config& base) {
    std::string text = "parameter,value,margin,verdict,winding_number,rhp_pole_count\n";
    for (double v : values) {
        Config cfg = base;
        *cfg.field(parameter) = v;
        cfg.validate();
        SystemBits sys = make_system(cfg);
        NyquistReport rep = assess_stability(sys.yg, sys.seq);
        text += parameter + "," + fmt_double(v) + "," + fmt_double(rep.margin) + "," +
                to_string(rep.verdict) + "," + std::to_string(rep.winding_number) + "," +
                std::to_string(rep.rhp_pole_count) + "\n";
    }
    return text;
}

}  // namespace detail

inline RunArtifacts run_sweep(const std::string& command, const Config& cfg, const SweepOptions& sweep,
                              const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    std::string parameter = sweep.parameter;
    std::vector<double> values = sweep.values;
    if (command == "sweep-line") {
        parameter = "l_line_pu";
        if (values.empty()) values = {0.20, 0.26};
    } else {
        if (parameter != "kp_pll" && parameter != "ki_pll")
            throw std::invalid_argument("sweep-pll: parameter must be kp_pll or ki_pll");
        if (values.empty())
            values = parameter == "kp_pll" ? std::vector<double>{1.5, 2.5, 3.5}
                                           : std::vector<double>{2000.0, 3020.0, 4000.0};
    }
    detail::emit(art, "sweep.csv", detail::sweep_csv(parameter, values, cfg));
    detail::emit_manifest(art, command, cfg);
    return art;
}

inline RunArtifacts run_simulate(const Config& cfg, const RunOptions& opt, const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    const SimulateOptions& so = opt.sim;
    SystemModel model = assemble_model(cfg.vsc(), cfg.grid());

    Scenario scenario;
    scenario.t_end = so.t_end;
    scenario.dt = so.dt;
    scenario.store_every = so.store_every;
    if (so.event_time >= 0.0) scenario.events.push_back({so.event_time, so.event_l_line});
    if (so.perturb_theta != 0.0) {
        scenario.initial_offset = Eigen::VectorXd::Zero(model.n_states());
        scenario.initial_offset[0] = so.perturb_theta;
    }
    SimTrace trace = simulate(model, scenario);

    std::vector<std::string> header = {"t"};
    header.insert(header.end(), trace.columns.begin(), trace.columns.end());
    CsvBuilder csv(header);
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < trace.rows.size(); ++k) {
        row[0] = trace.time_of(k);
        std::copy(trace.rows[k].begin(), trace.rows[k].end(), row.begin() + 1);
        csv.row(row);
    }
    detail::emit(art, "trace.csv", csv.str());

    nlohmann::json spec;
    spec["diverged"] = trace.diverged;
    if (trace.diverged) spec["diverged_at_s"] = trace.diverged_at;
    const double t0 = so.window_t0.value_or(std::max(so.event_time, 0.0) + 0.5);
    const double t1 = so.window_t1.value_or(so.t_end);
    try {
        DominantMode mode = dominant_frequency(trace, so.signal, t0, t1);
        spec["signal"] = so.signal;
        spec["window_s"] = {t0, t1};
        spec["f_hz"] = mode.f_hz;
        spec["amplitude"] = mode.amplitude;
        spec["growth_rate_per_s"] = mode.growth_rate;
        spec["f_stationary_hz"] = {cfg.f0_hz - mode.f_hz, cfg.f0_hz + mode.f_hz};
    } catch (const std::exception& e) {
        spec["spectrum_error"] = e.what();
    }
    detail::emit(art, "spectrum.json", spec.dump(2) + "\n");

    if (opt.svg) {
        std::vector<std::pair<double, double>> pts;
        const std::size_t col = trace.column_index("u_mag");
        double lo = 1e300, hi = -1e300;
        for (std::size_t k = 0; k < trace.rows.size(); ++k) {
            lo = std::min(lo, trace.rows[k][col]);
            hi = std::max(hi, trace.rows[k][col]);
        }
        const double pad = std::max(1e-6, 0.1 * (hi - lo));
        SvgPlot plot(0.0, trace.time_of(trace.rows.size() - 1), lo - pad, hi + pad, 960, 480);
        plot.axes();
        for (std::size_t k = 0; k < trace.rows.size(); ++k)
            pts.emplace_back(trace.time_of(k), trace.rows[k][col]);
        plot.polyline(pts, "#202020");
        detail::emit(art, "trace.svg", plot.finish());
    }
    detail::emit_manifest(art, "simulate", cfg);
    art.summary = spec;
    return art;
}

/// Cross-checking oracle suite: the determinant identity sampled at random
/// points, the finite-difference converter linearization against the closed
/// form, and closed-loop roots against state-matrix eigenvalues.
inline RunArtifacts run_verify(const Config& cfg, const VerifyOptions& vo, const std::filesystem::path& out) {
    RunArtifacts art{out, {}, {}};
    std::filesystem::create_directories(out);
    nlohmann::json checks = nlohmann::json::array();
    bool all_pass = true;
    const auto record = [&](const std::string& name, double value, double threshold) {
        const bool pass = value <= threshold;
        all_pass = all_pass && pass;
        checks.push_back({{"name", name}, {"residual", value}, {"threshold", threshold}, {"pass", pass}});
    };

    detail::SystemBits sys = detail::make_system(cfg);

    {  // determinant identity at random non-pole points
        std::mt19937 rng(vo.seed);
        std::uniform_real_distribution<double> mag(0.0, 1000.0);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
        double worst = 0.0;
        int done = 0;
        while (done < vo.points) {
            const Complex s = std::polar(mag(rng), ang(rng));
            try {
                worst = std::max(worst, mimo_char_eval(sys.yg, sys.y, s).identity_residual);
                ++done;
            } catch (const PoleError&) {
                continue;  // resample
            }
        }
        record("determinant_identity", worst, 1e-9);
    }

    {  // converter linearization scan
        std::vector<Complex> pts;
        for (int k = 0; k < 20; ++k)
            pts.push_back(Complex(0.0, std::pow(10.0, 0.0 + 3.0 * double(k) / 19.0)));
        auto scan = numeric_admittance_scan(cfg.vsc(), sys.op, pts);
        double worst_diag = 0.0, worst_off = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Complex ygv = sys.yg.eval(pts[k]);
            worst_diag = std::max(worst_diag, std::abs(scan[k][3] - ygv) / std::max(std::abs(ygv), 1e-300));
            worst_off = std::max({worst_off, std::abs(scan[k][0]), std::abs(scan[k][1]), std::abs(scan[k][2])});
        }
        record("appendix_linearization_diag", worst_diag, 1e-6);
        record("appendix_linearization_offdiag", worst_off, 1e-6);
    }

    {  // closed-loop roots vs state-matrix eigenvalues
        RationalFunction l = open_loop_gain(sys.yg, sys.seq);
        ClosedLoopRoots roots = closed_loop_roots(l, cfg.f0_hz);
        SystemModel model = assemble_model(cfg.vsc(), cfg.grid());
        std::vector<Complex> ev = eigenvalues(linearize_numeric(model));
        double worst = 0.0;
        for (const Complex& z : roots.roots) {
            double best = 1e300;
            for (const Complex& e : ev) best = std::min(best, std::abs(z - e) / std::max(1.0, std::abs(z)));
            worst = std::max(worst, best);
        }
        record("roots_vs_eigenvalues", worst, 1e-6);
        int ev_rhp = 0;
        for (const Complex& e : ev)
            if (e.real() > 1e-6 * std::max(1.0, std::abs(e))) ++ev_rhp;
        record("rhp_count_mismatch", std::abs(double(ev_rhp) - double(roots.rhp_roots.size())), 0.0);
    }

    nlohmann::json j;
    j["checks"] = checks;
    j["all_pass"] = all_pass;
    detail::emit(art, "verify.json", j.dump(2) + "\n");
    detail::emit_manifest(art, "verify", cfg);
    art.summary = j;
    if (!all_pass) throw std::runtime_error("verify: one or more oracle checks failed (see verify.json)");
    return art;
}

/// Dispatch used by both the executable and the tests.
inline RunArtifacts run_command(const std::string& command, const Config& cfg, const RunOptions& opt,
                                const std::filesystem::path& out_dir) {
    cfg.validate();
    if (command == "nyquist") return run_nyquist(cfg, opt, out_dir);
    if (command == "roots") return run_roots(cfg, out_dir);
    if (command == "eig") return run_eig(cfg, out_dir);
    if (command == "sweep-pll" || command == "sweep-line") return run_sweep(command, cfg, opt.sweep, out_dir);
    if (command == "simulate") return run_simulate(cfg, opt, out_dir);
    if (command == "verify") return run_verify(cfg, opt.verify, out_dir);
    throw std::invalid_argument("unknown command: " + command);
}

}  // namespace gisc
