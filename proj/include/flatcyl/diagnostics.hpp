#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "flatcyl/spectral_core.hpp"

namespace flatcyl {

struct DecayFit {
    double D = 0.0;      // fitted amplitude
    double nu = 0.0;     // fitted rate in e^{-nu (1 + |k1|) t}
    double power = 0.0;  // fitted exponent of |k|
    /// Smallest D with |omega| <= D e^{-nu (1 + |k1|) t / 2} / k^2 over the window.
    double D_envelope = 0.0;
    /// Whether |omega| <= D e^{-nu (1 + |k1|) t} / k^2 holds on the window with the fitted D.
    bool fitted_bound_holds = false;
    int modes = 0;
    double rms_residual = 0.0;
};

struct DiagnosticsRecord {
    double t = 0.0;
    double U = 0.0;
    double E = 0.0;
    double max_constraint_residual = 0.0;
    cplx mean_vorticity;
    double momentum_x1 = 0.0;          // int_C u1
    double boundary_trace = 0.0;       // int_T [omega(x1, 0) - omega(x1, pi)] dx1
    double boundary_u1_max = 0.0;      // max |u1| on the wall rows
    double boundary_u2_max = 0.0;      // max |u2| on the wall rows
    cplx lemma2_sum;                   // closed-form functional, zero on constrained fields
    cplx lemma2_truncated;             // sum_{k2,-} N_{0,k2} / k2^2 over k2 <= K2
    double norm_alpha = 0.0;
    std::optional<DecayFit> decay;

    double boundary_velocity_max() const { return std::max(boundary_u1_max, boundary_u2_max); }
};

struct RecordOptions {
    double alpha = 1.5;
    double beta = 0.0;
    /// Grid used for wall traces; 0 selects 2 K + 2.
    int n1 = 0;
    int n2 = 0;
};

/// `convolution` (the hat convolution of `field`) may be supplied to avoid recomputing it.
DiagnosticsRecord record(const SpectrumField& field, const RecordOptions& opt = {},
                         const HatArray* convolution = nullptr);

/// i sum_{h even != 0} R_{0,h} pi / (2h): the k2 -> infinity re-expansion of
/// sum_{k2,-} N_{0,k2} / k2^2 for the band-limited product.
cplx lemma2_sum(const HatArray& r);
cplx lemma2_truncated(const ModeArray& nonlinear);

/// int_C u1 = -4 pi sum_{k2,-} omega_{0,k2} / k2^2.
double momentum_x1(const ModeArray& field);
/// Wall traces by grid-row evaluation and trapezoid in x1.
double boundary_trace_integral(const ModeArray& field, int n1, int n2);

/// Per-step energy identity residual (U1 - U0)/dt + (E0 + E1), i.e. dU/dt + 2E
/// with the midpoint enstrophy taken as the trapezoid mean.
double energy_identity_residual(double U0, double U1, double E0, double E1, double dt);

/// Momentum balance |(P_{n+1} - P_{n-1}) / (2 dt) - B_n| at the middle snapshot.
double momentum_balance_residual(std::span<const SpectrumField> window, double dt);
/// Same from precomputed series; entry i is the residual at index i + 1.
std::vector<double> momentum_balance_series(std::span<const double> momentum, std::span<const double> trace, double dt);

/// Least-squares fit of log|omega| = log D - nu (1 + |k1|) t - p log|k| over
/// |k1| <= k1_lim, k2 <= k2_lim, (k1, k2) != (0, 0), |omega| > floor.
DecayFit decay_fit(const SpectrumField& field, int k1_lim, int k2_lim, double floor = 1e-13);
/// Window excluding the top third of retained wavenumbers.
DecayFit decay_fit(const SpectrumField& field);

/// Exponential-versus-power comparison along k2 at fixed k1 over [k2_lo, k2_hi].
struct K2Profile {
    double exp_rate = 0.0;   // slope of -log|omega| in k2
    double power = 0.0;      // slope of -log|omega| in log k
    double exp_rms = 0.0;    // residuals of the two fits
    double power_rms = 0.0;
    int modes = 0;
};
K2Profile k2_profile(const SpectrumField& field, int k1, int k2_lo, int k2_hi, double floor = 1e-13);

/// sup |omega| e^{(1 + |k1|) t / 4} |k|^alpha (1 + |k1|^beta); without t, sup |omega| |k|^alpha.
double weighted_norm(const ModeArray& field, double alpha, double beta, std::optional<double> t);

/// Fixed column order of the per-step CSV.
const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& os);
/// momentum_residual may be NaN when a neighbour is unavailable.
void write_csv_row(std::ostream& os, long step, const DiagnosticsRecord& r, double energy_residual,
                   double momentum_residual, int picard_iterations);

}  // namespace flatcyl
