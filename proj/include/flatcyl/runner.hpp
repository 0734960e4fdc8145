#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "flatcyl/run_config.hpp"

namespace flatcyl {

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> T;
    std::optional<std::filesystem::path> out;
    bool dry_run = false;
    std::optional<std::filesystem::path> restart;
};

/// Process exit codes; the stderr line `error category=<name> ...` names the same category.
enum class ExitCode : int {
    ok = 0,
    config = 2,
    restart = 3,
    numerical = 4,
    io = 5,
    internal = 70,
};

/// Loads the config and applies command-line overrides (flags shadow file values).
RunConfig resolve_config(const RunOptions& opt);

/// Executes a run. Output directory layout:
///   manifest.txt, diagnostics.csv, decay_fit.json, flux.txt,
///   snapshots/omega_<step>.txt, checkpoints/step_<step>/
/// Returns the exit code; errors are reported on `err` as one machine-readable line.
int run_main(const RunOptions& opt, std::ostream& out, std::ostream& err);

/// Honors FLATCYL_THREADS when set to a positive integer.
void apply_thread_env();

}  // namespace flatcyl
