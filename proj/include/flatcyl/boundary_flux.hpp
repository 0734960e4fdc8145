#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "flatcyl/exp_weights.hpp"
#include "flatcyl/spectrum.hpp"

namespace flatcyl {

/// d_+(k1) = k1 tanh(pi k1 / 2), d_-(k1) = k1 coth(pi k1 / 2), for |k1|.
double d_pm(int k1, Parity p);

/// Closed form of sum_{k2,+/-} 1/(k^2 + lambda) = (pi/2) phi(z)/z, z = sqrt(k1^2 + lambda),
/// phi_+ = coth(pi z/2), phi_- = tanh(pi z/2). Rejects lambda on (-inf, -k1^2].
cplx laplace_sum(int k1, cplx lambda, Parity p);

/// Infinite parity sum sum_{k2,+/-} e^{-(k1^2 + k2^2) tau}: image sum for tau < 1,
/// cosine series for tau >= 1.
double singular_kernel(int k1, double tau, Parity p);
/// The theta part of singular_kernel without e^{-k1^2 tau}, by one chosen representation.
double theta_series(double tau, Parity p);
double theta_images(double tau, Parity p);

/// Truncated sums over 0 <= k2 <= k2max.
double singular_kernel_truncated(int k1, int k2max, double tau, Parity p);
double parity_sum_inverse_square(int k1, int k2max, Parity p);

/// Product-integration weights of a Volterra kernel K on a uniform grid.
/// Lag m covers tau in [m dt, (m+1) dt]; with a linear in s,
///   int K(tau) a(t - tau) dtau over lag m = near[m] a(t - m dt) + far[m] a(t - (m+1) dt).
struct LagWeights {
    double dt = 0.0;
    std::vector<double> near;
    std::vector<double> far;
};

/// Gauss-Legendre product weights for a kernel with at most a tau^{-1/2}
/// singularity at 0 (lag 0 uses tau = dt v^2).
LagWeights quadrature_lag_weights(const std::function<double(double)>& kernel, double dt, int n_lags);

/// Kernel data for the second-kind equation
///   S0 a(t) - int_0^t K(t - s) a(s) ds = g'(t)
/// for one (k1, parity). k2max < 0 selects the infinite (closed-form) kernel.
struct VolterraKernel {
    int k1 = 0;
    Parity parity = Parity::even;
    int k2max = -1;
    double d = 0.0;
    double s0 = 0.0;
    LagWeights lag;

    int n_lags() const { return static_cast<int>(lag.near.size()); }
};

VolterraKernel make_truncated_kernel(int k1, int k2max, Parity p, double dt, int n_lags);
VolterraKernel make_infinite_kernel(int k1, Parity p, double dt, int n_lags);

/// Smallest admissible S0 - near[0]; below it the step is treated as ill-conditioned.
inline constexpr double flux_step_floor = 1e-10;

/// a(0) = g'(0) / S0.
cplx initial_flux(const VolterraKernel& k, cplx gprime0);

/// Advances the second-kind solution: given a(t_0..t_n) in `history`, returns a(t_{n+1}).
/// Real weights act on real and imaginary parts independently.
cplx solve_flux_step(const VolterraKernel& k, std::span<const cplx> history, cplx gprime_next);

/// Full solve on t_0..t_n from g' samples.
std::vector<cplx> solve_flux(const VolterraKernel& k, std::span<const cplx> gprime);
std::vector<double> solve_flux(const VolterraKernel& k, std::span<const double> gprime);

/// Per-(k1, parity) complex values for |k1| <= K1.
class FluxArray {
  public:
    FluxArray() = default;
    explicit FluxArray(int k1max) : k1max_(k1max), v_(static_cast<std::size_t>(2 * k1max + 1) * 2) {}

    int k1max() const { return k1max_; }
    cplx& operator()(int k1, Parity p) { return v_[static_cast<std::size_t>(k1 + k1max_) * 2 + parity_slot(p)]; }
    cplx operator()(int k1, Parity p) const {
        return v_[static_cast<std::size_t>(k1 + k1max_) * 2 + parity_slot(p)];
    }
    std::span<const cplx> data() const { return v_; }
    double max_abs() const;

  private:
    int k1max_ = 0;
    std::vector<cplx> v_;
};

/// Makes f_{-k1} = conj(f_{k1}) and sets the k1 = 0 entries to zero.
void enforce_flux_symmetry(FluxArray& f);

/// Time-sampled production amplitudes on the evolution grid t_n = n dt.
struct BoundaryFluxHistory {
    int k1max = 0;
    double dt = 0.0;
    std::vector<FluxArray> samples;

    /// Per-wall fluxes f_1 = (f_+ + f_-)/2 (at x2 = 0) and f_2 = (f_+ - f_-)/2 (at x2 = pi).
    cplx wall_flux_bottom(std::size_t n, int k1) const;
    cplx wall_flux_top(std::size_t n, int k1) const;
};

// Flux file: header `k1max=<K1> dt=<dt> n=<steps>`, then `k1 parity t re im`
// for n + 1 samples, parity written as + or -.
void write_flux_history(const std::filesystem::path& p, const BoundaryFluxHistory& h);
BoundaryFluxHistory read_flux_history(const std::filesystem::path& p);

/// g and g' of the constraint equation at one time, per (k1, parity).
struct VolterraRHS {
    double t = 0.0;
    FluxArray g;
    FluxArray gprime;
};

/// g = sum_{+/-} (1/k^2) (-e^{-k^2 t} omega_k(0) + psi_k),
/// g' = sum_{+/-} (e^{-k^2 t} omega_k(0) + N_k / k^2 - psi_k),
/// where psi_k = int_0^t e^{-k^2 (t - s)} N_k(s) ds is accumulated with the
/// exponential rule of advance_exponential_integral. k1 = 0 entries are zero.
VolterraRHS volterra_rhs(const ModeArray& omega0, const ModeArray& psi, const ModeArray& nonlinear, double t);

/// Kernel data for every k1 = 1..K1 and both parities at the run truncation.
class KernelSet {
  public:
    KernelSet() = default;
    KernelSet(Truncation tr, double dt, int n_lags);

    const Truncation& truncation() const { return tr_; }
    double dt() const { return dt_; }
    int n_lags() const { return n_lags_; }
    /// Kernel of |k1|; k1 != 0.
    const VolterraKernel& kernel(int k1, Parity p) const;
    const ModeWeights& mode_weights() const { return weights_; }

    /// Binary sidecar keyed by (K1, K2, dt, n_lags).
    void save(const std::filesystem::path& p) const;
    static std::optional<KernelSet> load(const std::filesystem::path& p, Truncation tr, double dt, int n_lags);
    /// Loads the sidecar when its key matches, otherwise rebuilds and rewrites it.
    static KernelSet cached(const std::filesystem::path& p, Truncation tr, double dt, int n_lags);

    friend bool operator==(const KernelSet& a, const KernelSet& b);

  private:
    Truncation tr_{};
    double dt_ = 0.0;
    int n_lags_ = 0;
    std::vector<VolterraKernel> k_;  // index 2 (|k1| - 1) + parity slot
    ModeWeights weights_;
};

/// Flux at t_{n+1} that makes the one-step exponential update of the truncated
/// modes satisfy the constraint sums exactly. `phi` holds
/// int_0^{t_n} e^{-k^2 (t_n - s)} f(s) ds per mode; g_next is g(t_{n+1}).
/// This is the first-kind equation sum (1/k^2) phi_k(t_{n+1}) = g(t_{n+1})
/// discretized with the same rule as the state update.
FluxArray solve_consistent_flux(const KernelSet& ks, const FluxArray& g_next, const ModeArray& phi,
                                const FluxArray& f_prev);

/// Spreads f_{+/-,k1} over the modes of matching k2 parity.
ModeArray flux_to_modes(const FluxArray& f, Truncation tr);

/// Refuses data whose constraint right-hand side at t = 0 is not zero.
inline constexpr double initial_rhs_tol = 1e-12;
void require_consistent_initial_rhs(const ModeArray& omega0);

}  // namespace flatcyl
