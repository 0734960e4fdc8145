#pragma once

#include <memory>
#include <vector>

#include "flatcyl/spectrum.hpp"

namespace flatcyl {

/// Real samples on the tensor grid x1_j = -pi + 2 pi j / n1,
/// x2_m = pi m / (n2 - 1); both wall rows x2 = 0 and x2 = pi are included.
struct GridSamples {
    int n1 = 0;
    int n2 = 0;
    std::vector<double> values;  // index j * n2 + m

    double x1(int j) const { return -pi + 2.0 * pi * j / n1; }
    double x2(int m) const { return pi * m / (n2 - 1); }
    double operator()(int j, int m) const { return values[static_cast<std::size_t>(j) * n2 + m]; }
    double& operator()(int j, int m) { return values[static_cast<std::size_t>(j) * n2 + m]; }
};

struct VelocityGrid {
    GridSamples u1;
    GridSamples u2;
};

/// u_k = -i k_perp hat(omega)_k / k^2 with k_perp = (-k2, k1).
/// Throws InvalidInput if omega_{0,0} != 0.
VelocitySpectrum velocity_from_vorticity(const SpectrumField& field);

/// Evaluates the Neumann series of `field` on the grid. Requires n1 >= 2 K1,
/// n2 >= 2 K2 (and n2 >= 2).
GridSamples evaluate_on_grid(const ModeArray& field, int n1, int n2);
VelocityGrid evaluate_on_grid(const VelocitySpectrum& u, int n1, int n2);

/// Sine-to-cosine expansion coefficient: sin(q y) = sum_p A_{q,p} cos(p y) on [0, pi].
double sine_cosine_coefficient(int q, int p);

/// Hat convolution R_{k1,h2} = sum_{j + l = (k1,h2), j != 0} (j_perp . l / j^2) hat(w)_j hat(w)_l
/// over the truncated hat lattice, for |k1| <= K1 and |h2| <= 2 K2.
/// Summation runs lexicographically in (j1, j2).
HatArray hat_convolution(const ModeArray& field);

/// N_{k1,k2} = i sum_{|h2| <= 2K2} R_{k1,h2} A_{h2,k2}, for 0 <= k2 <= K2.
NonlinearTerm reexpand_to_neumann(const HatArray& r, Truncation tr);

enum class ConvolutionPath { direct, transform };

/// Nonlinear term by direct O(K^4) hat convolution.
NonlinearTerm nonlinear_term(const SpectrumField& field);

/// Grid-based hat convolution. Holds FFT plans and work buffers for one truncation;
/// a single instance must not be used from several threads at once.
class TransformConvolution {
  public:
    explicit TransformConvolution(Truncation tr);
    ~TransformConvolution();
    TransformConvolution(const TransformConvolution&) = delete;
    TransformConvolution& operator=(const TransformConvolution&) = delete;

    HatArray operator()(const ModeArray& field);
    int grid_n1() const;
    int grid_n2() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Nonlinear term with a selectable convolution path; reuses transform plans.
class NonlinearEvaluator {
  public:
    NonlinearEvaluator(Truncation tr, ConvolutionPath path);
    NonlinearTerm operator()(const SpectrumField& field);
    HatArray convolution(const SpectrumField& field);
    ConvolutionPath path() const { return path_; }

  private:
    Truncation tr_;
    ConvolutionPath path_;
    std::unique_ptr<TransformConvolution> transform_;
};

/// Per-k1 wall constraint sums (sum_{k2,+} omega/k^2, sum_{k2,-} omega/k^2), truncated at K2.
struct ConstraintResidual {
    int k1 = 0;
    cplx even;
    cplx odd;
};

/// One entry per k1 != 0, in increasing k1.
std::vector<ConstraintResidual> constraint_residuals(const ModeArray& field);
double max_constraint_residual(const ModeArray& field);

/// Overwrites omega_{k1,0} and omega_{k1,1} (k1 != 0) so that both constraint sums
/// vanish; sets omega_{0,0} = 0. Requires K2 >= 3.
SpectrumField project_well_prepared(const SpectrumField& field);

struct EnergyEnstrophy {
    double energy = 0.0;     // U = sum_{hat k != 0} |hat w|^2 / k^2
    double enstrophy = 0.0;  // E = sum_{hat k} |hat w|^2
};

EnergyEnstrophy energy_enstrophy(const ModeArray& field);

}  // namespace flatcyl
