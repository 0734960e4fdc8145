#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "flatcyl/evolution.hpp"

namespace flatcyl {

/// Raised for unreadable or invalid run configurations.
class ConfigError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

// Config file: one `key = value` per line, `#` starts a comment.
//   k1max, k2max                truncation (>= 4)
//   D0, alpha, beta             initial envelope D0 / (|k|^alpha (1 + |k1|^beta)), 1 < alpha < 2
//   dt, T                       step and horizon
//   picard_tol, picard_max_iters, constraint_tol
//   convolution                 transform | direct
//   linear_only                 0 | 1
//   seed                        initial-data seed
//   out                         output directory
//   snapshot_every              steps between snapshots (0: first and last only)
//   checkpoint_every            steps between checkpoints (0: none)
//   decay_fit_times             comma-separated times for decay fits (times past T are skipped)
//   kernel_cache                optional path of the kernel sidecar
struct RunConfig {
    Truncation truncation{16, 64};
    double D0 = 0.1;
    double alpha = 1.5;
    double beta = 0.0;
    double dt = 1e-3;
    double T = 1.0;
    double picard_tol = 1e-12;
    int picard_max_iters = 50;
    double constraint_tol = 1e-8;
    ConvolutionPath convolution = ConvolutionPath::transform;
    bool linear_only = false;
    std::uint64_t seed = 1;
    std::filesystem::path out = "run";
    long snapshot_every = 0;
    long checkpoint_every = 0;
    std::vector<double> decay_fit_times{0.5};
    std::filesystem::path kernel_cache;

    /// Throws ConfigError on any out-of-range parameter.
    void validate() const;
    EvolutionConfig evolution() const;
};

/// Sets one key from its text value; unknown keys are rejected.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

RunConfig parse_run_config(std::istream& is, const std::string& source = "config");
RunConfig load_run_config(const std::filesystem::path& p);

/// The resolved parameter set in the config file format.
void write_run_config(std::ostream& os, const RunConfig& c);

/// Random envelope data, deterministic in the seed, projected to satisfy the wall
/// constraints. Columns are rescaled after projection so the envelope still holds.
SpectrumField generate_initial_data(const RunConfig& c);

}  // namespace flatcyl
