// Command-line front end: each subcommand reads an experiment config,
// runs the corresponding pipeline, and writes JSON/CSV/gnuplot artifacts.
// Exit codes: 0 pass, 1 violation found, 2 inconclusive, 3 usage/IO error.
#include <CLI11.hpp>
#include <iostream>

#include "nspect/pipeline.hpp"

using namespace nspect;

int main(int argc, char** argv) {
    CLI::App app{"Neumann spectra on irregular domains: computation and verification"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the grid flag
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int jobs = 2;
    double override_h = 0;
    int override_m = 0;
    double override_tol = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->set_help_flag("--help", "print help");
        sub->add_option("--domain,--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", jobs, "parallel workers for sweeps");
        sub->add_option("--h", override_h, "override grid resolution");
        sub->add_option("--m", override_m, "override eigenpair count");
        sub->add_option("--tol", override_tol, "override solver tolerance");
    };

    CLI::App* c_spectrum = app.add_subcommand("spectrum", "lowest Neumann eigenpairs");
    CLI::App* c_whitney = app.add_subcommand("whitney", "dyadic Whitney covering and checks");
    CLI::App* c_dimension = app.add_subcommand("dimension", "collar-decay boundary dimension");
    CLI::App* c_heat = app.add_subcommand("heatkernel", "heat trace, smoothing fits, bound chain");
    CLI::App* c_sobolev = app.add_subcommand("sobolev", "embedding-constant refinement study");
    CLI::App* c_perturb = app.add_subcommand("perturb", "boundary-perturbation eigenvalue sweep");
    CLI::App* c_verify = app.add_subcommand("verify-all", "full verification battery");
    for (auto* sub : {c_spectrum, c_whitney, c_dimension, c_heat, c_sobolev, c_perturb, c_verify})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        ConfigFile cfg = ConfigFile::parse_file(config_path);
        std::string section = c_spectrum->parsed()    ? "spectrum"
                              : c_heat->parsed()      ? "heat"
                              : c_verify->parsed()    ? "verify"
                              : c_perturb->parsed()   ? "perturb"
                              : c_sobolev->parsed()   ? "sobolev"
                              : c_whitney->parsed()   ? "whitney"
                                                      : "dimension";
        if (override_h > 0) cfg.set_override(section, "h", override_h);
        if (override_m > 0) cfg.set_override(section, "m", override_m);
        if (override_tol > 0) cfg.set_override(section, "tol", override_tol);

        RunContext ctx(out_dir, cfg, jobs);
        CommandResult result;
        if (c_spectrum->parsed()) result = cmd_spectrum(cfg, ctx);
        if (c_whitney->parsed()) result = cmd_whitney(cfg, ctx);
        if (c_dimension->parsed()) result = cmd_dimension(cfg, ctx);
        if (c_heat->parsed()) result = cmd_heatkernel(cfg, ctx);
        if (c_sobolev->parsed()) result = cmd_sobolev(cfg, ctx);
        if (c_perturb->parsed()) result = cmd_perturb(cfg, ctx);
        if (c_verify->parsed()) result = cmd_verify_all(cfg, ctx);
        std::cout << result.summary.dump(2) << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
