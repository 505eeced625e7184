// Command-line front end: stability analysis and time-domain studies of a
// grid-connected converter from a key=value config file.

#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>
#include <string>

#include "gisc/cli.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        out.push_back(std::stod(csv.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized-impedance stability analysis for grid-connected converters"};
    app.set_version_flag("--version", std::string("gisc ") + gisc::kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    gisc::RunOptions opt;
    app.add_option("--config", config_path, "key = value config file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory");

    app.add_subcommand("nyquist", "Nyquist curve, winding number, verdict and margin")
        ->add_flag("--svg", opt.svg, "also render nyquist.svg");
    app.add_subcommand("roots", "closed-loop roots with stationary-frame frequency mapping");
    app.add_subcommand("eig", "eigenvalues of the numerically linearized state matrix");
    app.add_subcommand("verify", "run the cross-validation oracle suite");
    auto* vsub = app.get_subcommand("verify");
    vsub->add_option("--points", opt.verify.points, "random sample count for the determinant identity");
    vsub->add_option("--seed", opt.verify.seed, "random seed");

    std::string sweep_values;
    auto* sp = app.add_subcommand("sweep-pll", "margin/verdict sweep over a PLL gain");
    sp->add_option("--param", opt.sweep.parameter, "kp_pll or ki_pll");
    sp->add_option("--values", sweep_values, "comma-separated parameter values");
    auto* sl = app.add_subcommand("sweep-line", "margin/verdict sweep over l_line_pu");
    sl->add_option("--values", sweep_values, "comma-separated reactance values");

    auto* sim = app.add_subcommand("simulate", "nonlinear time-domain run with an optional line step");
    sim->add_option("--t-end", opt.sim.t_end, "simulation length, s");
    sim->add_option("--dt", opt.sim.dt, "integration step, s (<= 1e-4)");
    sim->add_option("--store-every", opt.sim.store_every, "store every Nth step");
    sim->add_option("--event-t", opt.sim.event_time, "line-step time, s (negative disables)");
    sim->add_option("--event-l-line", opt.sim.event_l_line, "post-step l_line_pu");
    sim->add_option("--perturb-theta", opt.sim.perturb_theta, "initial PLL angle offset, rad");
    double win_t0 = -1.0, win_t1 = -1.0;
    sim->add_option("--win-t0", win_t0, "spectrum window start, s");
    sim->add_option("--win-t1", win_t1, "spectrum window end, s");
    sim->add_option("--signal", opt.sim.signal, "trace column for the spectrum");
    sim->add_flag("--svg", opt.svg, "also render trace.svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        gisc::Config cfg = config_path.empty() ? gisc::Config{} : gisc::load_config(config_path);
        if (!sweep_values.empty()) opt.sweep.values = parse_values(sweep_values);
        if (win_t0 >= 0.0) opt.sim.window_t0 = win_t0;
        if (win_t1 >= 0.0) opt.sim.window_t1 = win_t1;
        const std::string command = app.get_subcommands().front()->get_name();
        gisc::RunArtifacts art = gisc::run_command(command, cfg, opt, out_dir);
        std::printf("%s: wrote %zu file(s) to %s\n", command.c_str(), art.files.size(),
                    art.dir.string().c_str());
        if (!art.summary.is_null()) std::printf("%s\n", art.summary.dump(2).c_str());
        return 0;
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::fprintf(stderr, "%s\n", err.dump(2).c_str());
        try {
            std::filesystem::create_directories(out_dir);
            gisc::write_text_file(std::filesystem::path(out_dir) / "error.json", err.dump(2) + "\n");
        } catch (...) {
        }
        return 1;
    }
}
