#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flatcyl/boundary_flux.hpp"
#include "flatcyl/spectral_core.hpp"

namespace flatcyl {

struct EvolutionConfig {
    double dt = 1e-3;
    double T = 1.0;
    double picard_tol = 1e-12;
    int picard_max_iters = 50;
    double constraint_tol = 1e-8;
    ConvolutionPath convolution = ConvolutionPath::transform;
    /// Drops the advection term (N = 0); used for linear reference runs.
    bool linear_only = false;

    void validate() const;
    /// Number of steps, round(T / dt); T must be a whole number of steps to 1e-9.
    long steps() const;
};

/// A step could not be completed. Carries the offending step index (the step
/// producing t_{step}).
class StepError : public NumericalFailure {
  public:
    enum class Kind { non_finite, picard_divergence, constraint_violation };
    StepError(Kind kind, long step, const std::string& what);
    Kind kind() const { return kind_; }
    long step() const { return step_; }

  private:
    Kind kind_;
    long step_;
};

/// Everything needed to continue the integration from t_n.
struct EvolutionState {
    long step = 0;
    SpectrumField omega;     // omega(t_n)
    NonlinearTerm nonlinear;  // N(t_n)
    FluxArray flux;          // f(t_n)
    ModeArray psi;           // int_0^{t_n} e^{-k^2 (t_n - s)} N(s) ds
    ModeArray phi;           // int_0^{t_n} e^{-k^2 (t_n - s)} f(s) ds
    int picard_iterations = 0;     // iterations used to reach t_n
    double picard_last_delta = 0.0;  // final iterate distance of that step
};

/// omega_k(t_{n+1}) = e^{-k^2 dt} omega_k(t_n) + w0 (f - N)_k(t_n) + w1 (f - N)_k(t_{n+1}),
/// f taken with the parity of k2.
SpectrumField duhamel_step(const SpectrumField& omega, const FluxArray& f_prev, const ModeArray& n_prev,
                           const FluxArray& f_next, const ModeArray& n_next, const ModeWeights& w);

/// Per-step Picard integrator of the coupled vorticity and boundary-flux system.
class Evolver {
  public:
    /// Validates well-preparedness of `initial` and sets up t = 0 (N(0), f(0)).
    Evolver(const SpectrumField& initial, const EvolutionConfig& cfg,
            std::shared_ptr<const KernelSet> kernels = nullptr);
    /// Resumes from a saved state; `initial` is the t = 0 field of the same run.
    Evolver(const SpectrumField& initial, EvolutionState state, const EvolutionConfig& cfg,
            std::shared_ptr<const KernelSet> kernels = nullptr);

    /// One accepted step t_n -> t_{n+1}.
    const EvolutionState& advance();

    const EvolutionState& state() const { return state_; }
    const SpectrumField& initial() const { return omega0_; }
    const EvolutionConfig& config() const { return cfg_; }
    const KernelSet& kernels() const { return *kernels_; }
    double time() const { return static_cast<double>(state_.step) * cfg_.dt; }
    bool finished() const { return state_.step >= cfg_.steps(); }
    /// Sup distances between successive Picard iterates of the last step.
    const std::vector<double>& last_iterate_distances() const { return deltas_; }

  private:
    NonlinearTerm nonlinear(const SpectrumField& w);

    EvolutionConfig cfg_;
    SpectrumField omega0_;
    std::shared_ptr<const KernelSet> kernels_;
    NonlinearEvaluator evaluator_;
    EvolutionState state_;
    std::vector<double> deltas_;
};

struct Trajectory {
    double dt = 0.0;
    std::vector<SpectrumField> fields;
    std::vector<NonlinearTerm> nonlinear;
    BoundaryFluxHistory fluxes;
    std::vector<int> picard_iterations;
};

/// Called after setup (step 0) and after every accepted step.
using StepHook = std::function<void(const Evolver&)>;

/// Integrates to T. Keeps every field when `keep_fields`, otherwise only the
/// first and last (fluxes and iteration counts are always kept).
Trajectory run(const SpectrumField& initial, const EvolutionConfig& cfg, const StepHook& hook = {},
               bool keep_fields = true);

/// Checkpoint directory: manifest.txt plus initial.txt, state.txt, nonlinear.txt,
/// psi.txt, phi.txt and flux.txt (the flux history so far).
void write_checkpoint(const std::filesystem::path& dir, const Evolver& ev, const BoundaryFluxHistory& fluxes);

struct Checkpoint {
    SpectrumField initial;
    EvolutionState state;
    BoundaryFluxHistory fluxes;
    EvolutionConfig config;  // as recorded (T of the original run)
};

/// Reads a checkpoint; throws InvalidInput on a malformed or inconsistent directory.
Checkpoint read_checkpoint(const std::filesystem::path& dir);

/// Throws InvalidInput unless `cfg` may continue `ck` (same truncation, dt,
/// tolerances, convolution path; T not before the checkpoint time).
void require_compatible(const Checkpoint& ck, const EvolutionConfig& cfg);

}  // namespace flatcyl
