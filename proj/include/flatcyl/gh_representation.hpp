#pragma once

#include <span>
#include <vector>

#include "flatcyl/types.hpp"

namespace flatcyl {

// Closed-form resolvent of the first-kind constraint equation for the infinite
// k2 sums: with z = sqrt(k1^2 + lambda),
//   a~ = G~ (g')~ + H~ g~,  G~ = (2/pi) d sum_{n=0}^{4} (d/z)^n,
//   H~ = (2/pi) d lambda z / (z - d phi(z)) - lambda G~.
// G(t) = (2/pi) d [delta(t) + e^{-k1^2 t} sum_{n=1}^{4} d^n t^{n/2-1} / Gamma(n/2)].

struct BromwichOptions {
    double gamma = 0.125;     // contour Re lambda = -(1 - gamma) k1^2
    int asymptotic_terms = 8;  // large-z terms of H~ inverted analytically
    double tol = 1e-10;        // tail bound, relative to |k1|^3
    double y_start = 16.0;
    double y_max = 1e6;
};

cplx g_tilde(int k1, cplx lambda, Parity p);
cplx h_tilde(int k1, cplx lambda, Parity p);

/// Singular part of G (the delta term excluded), tau > 0.
double g_singular(int k1, double tau, Parity p);

/// H(t) at the given times by Bromwich quadrature along Re lambda = -(1 - gamma) k1^2.
/// Throws NumericalFailure when the truncated tail stays above tolerance.
std::vector<double> h_samples(int k1, Parity p, std::span<const double> times, const BromwichOptions& opt = {});

/// a(t_n) = (2/pi) d g'(t_n) + int G_sing(t_n - s) g'(s) ds + int H(t_n - s) g(s) ds
/// on the grid t_n = n dt. The constant solution a(0) is split off first (its data
/// carry the sqrt(t) onset of g'). Product integration for G_sing and for the analytic
/// large-z part of H, trapezoid for the Bromwich remainder.
std::vector<double> gh_representation_flux(int k1, Parity p, double dt, std::span<const double> g,
                                           std::span<const double> gprime, const BromwichOptions& opt = {});
std::vector<cplx> gh_representation_flux(int k1, Parity p, double dt, std::span<const cplx> g,
                                         std::span<const cplx> gprime, const BromwichOptions& opt = {});

}  // namespace flatcyl
