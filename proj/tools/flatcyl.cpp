#include <CLI11.hpp>
#include <iostream>

#include "flatcyl/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral Navier-Stokes on the flat cylinder with boundary vorticity production"};
    app.require_subcommand(1);

    flatcyl::RunOptions opt;
    std::uint64_t seed = 0;
    double dt = 0.0, T = 0.0;
    std::string out, restart;
    auto* run = app.add_subcommand("run", "integrate a configuration");
    run->add_option("config", opt.config, "key = value configuration file")->required()->check(CLI::ExistingFile);
    auto* o_seed = run->add_option("--seed", seed, "initial-data seed");
    auto* o_dt = run->add_option("--dt", dt, "time step");
    auto* o_T = run->add_option("--T", T, "horizon");
    auto* o_out = run->add_option("--out", out, "output directory");
    run->add_flag("--dry-run", opt.dry_run, "validate and print the resolved parameters");
    auto* o_restart = run->add_option("--restart", restart, "checkpoint directory to continue from");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            std::cerr << "error category=usage message=\"" << e.what() << "\"\n";
            return 64;
        }
        return app.exit(e);
    }
    if (*o_seed) opt.seed = seed;
    if (*o_dt) opt.dt = dt;
    if (*o_T) opt.T = T;
    if (*o_out) opt.out = out;
    if (*o_restart) opt.restart = restart;

    flatcyl::apply_thread_env();
    return flatcyl::run_main(opt, std::cout, std::cerr);
}
