#pragma once

// Slow reference implementations for tests. Nothing here shares code with the
// primary paths beyond the field containers.

#include <span>
#include <vector>

#include "flatcyl/spectrum.hpp"

namespace flatcyl::oracle {

/// Real samples on an n1 x n2 tensor grid with both wall rows.
struct GridField {
    int n1 = 0;
    int n2 = 0;
    double h1 = 0.0;  // x1 spacing, x1_j = -pi + j h1
    double h2 = 0.0;  // x2 spacing, x2_m = m h2
    std::vector<double> v;

    double operator()(int j, int m) const { return v[static_cast<std::size_t>(j) * n2 + m]; }
};

/// u . grad(omega) evaluated pointwise from the cosine/sine series, projected back
/// with (1/(2 pi^2)) int_C P e^{-i k1 x1} cos(k2 x2). x1 uses oversample * (2K1 + 1)
/// uniform points; x2 uses Gauss-Legendre. Rejects oversample < 2.
NonlinearTerm pseudospectral_nonlinear(const SpectrumField& field, int oversample = 2);

/// b(t_n) = sum_{k2,+/-} (1/k^2) int_0^{t_n} e^{-k^2 (t_n - s)} a(s) ds for a linear
/// between samples, every n, by closed-form antiderivatives.
std::vector<double> volterra_forward(std::span<const double> a, double dt, int k1, int k2max, Parity p);

struct HeatKernelPair {
    double series = 0.0;
    double images = 0.0;
    double series_tail = 0.0;  // analytic bounds on the neglected terms
    double images_tail = 0.0;
};

/// Neumann heat kernel on [0, pi] by cosine series and by images.
HeatKernelPair heat_kernel_dual(double t, double x2, double x2p);

/// Samples of the Neumann series of `field` on an n1 x n2 grid (x2 including walls),
/// by direct evaluation at every point.
GridField sample(const SpectrumField& field, int n1, int n2);

/// Coefficients from grid samples: trapezoid in x1 and in x2 (endpoints halved).
/// Exact for cosine polynomials when n2 - 1 > K2 and n1 > 2 K1.
SpectrumField grid_project(const GridField& g, Truncation tr);

/// max |div u| on a periodic n x n grid over the even extension x2 in [-pi, pi),
/// with u evaluated pointwise and derivatives by 8th-order central differences.
double fd_divergence_max(const SpectrumField& field, int n);

/// (1 / (2 pi^2)) int_C |u|^2 by point evaluation and quadrature.
double grid_kinetic_energy(const SpectrumField& field, int n1, int n2);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace flatcyl::oracle
