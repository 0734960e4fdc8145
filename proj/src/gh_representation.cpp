#include "flatcyl/gh_representation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flatcyl/boundary_flux.hpp"

namespace flatcyl {

namespace {

constexpr int g_terms = 4;

struct Resolvent {
    double k1sq, d;
    Parity p;

    // phi(z) - 1 without cancellation, Re z > 0.
    cplx phi_minus_one(cplx z) const {
        const cplx q = std::exp(-pi * z);
        return p == Parity::even ? 2.0 * q / (1.0 - q) : -2.0 * q / (1.0 + q);
    }

    // H~ minus its first n_asym large-z terms beyond G~, written so that the
    // cancellation between K and lambda G~ never happens numerically.
    cplx remainder(cplx lambda, int n_asym) const {
        const cplx z = std::sqrt(k1sq + lambda);
        const cplx pm1 = phi_minus_one(z);
        const cplx phi = 1.0 + pm1;
        const int n = g_terms + 1 + n_asym;
        const cplx q = d / z;
        cplx qn = 1.0;
        for (int i = 0; i < n; ++i) qn *= q;
        const cplx bracket = z * d * pm1 / ((z - d * phi) * (z - d)) + qn * z / (z - d);
        return (2.0 / pi) * d * lambda * bracket;
    }

    // Inverse transform of the subtracted terms
    // (2/pi) sum_{n=5}^{4+M} d^{n+1} [z^{2-n} - k1^2 z^{-n}].
    double asymptotic_inverse(double t, int n_asym) const {
        if (t <= 0.0) return 0.0;
        auto inv = [&](int m) {  // z^{-m} -> e^{-k1^2 t} t^{m/2 - 1} / Gamma(m/2)
            return std::exp(-k1sq * t + (0.5 * m - 1.0) * std::log(t) - std::lgamma(0.5 * m));
        };
        double s = 0.0;
        for (int n = g_terms + 1; n <= g_terms + n_asym; ++n)
            s += std::pow(d, n + 1) * (inv(n - 2) - k1sq * inv(n));
        return (2.0 / pi) * s;
    }
};

}  // namespace

cplx g_tilde(int k1, cplx lambda, Parity p) {
    const double d = d_pm(k1, p);
    const cplx z = std::sqrt(static_cast<double>(k1) * k1 + lambda);
    cplx s = 0.0, q = 1.0;
    for (int n = 0; n <= g_terms; ++n) {
        s += q;
        q *= d / z;
    }
    return (2.0 / pi) * d * s;
}

cplx h_tilde(int k1, cplx lambda, Parity p) {
    const double d = d_pm(k1, p);
    const double kk = static_cast<double>(k1) * k1;
    if (lambda.imag() == 0.0 && lambda.real() <= -kk)
        throw InvalidInput("h_tilde: lambda on the singular half-line");
    const cplx z = std::sqrt(kk + lambda);
    const cplx th = std::tanh(0.5 * pi * z);
    const cplx phi = p == Parity::even ? 1.0 / th : th;
    return (2.0 / pi) * d * lambda * z / (z - d * phi) - lambda * g_tilde(k1, lambda, p);
}

double g_singular(int k1, double tau, Parity p) {
    if (!(tau > 0.0)) throw InvalidInput("g_singular: tau must be positive");
    const double d = d_pm(k1, p);
    double s = 0.0, dn = 1.0;
    for (int n = 1; n <= g_terms; ++n) {
        dn *= d;
        s += dn * std::exp((0.5 * n - 1.0) * std::log(tau) - std::lgamma(0.5 * n));
    }
    return (2.0 / pi) * d * std::exp(-static_cast<double>(k1) * k1 * tau) * s;
}

namespace {

// Bromwich part of H only (the subtracted large-z terms excluded).
std::vector<double> bromwich_remainder(int k1, Parity p, std::span<const double> times, const BromwichOptions& opt) {
    if (k1 == 0) throw InvalidInput("h_samples: k1 must be nonzero");
    if (!(opt.gamma > 0.0 && opt.gamma < 1.0)) throw InvalidInput("h_samples: gamma must lie in (0, 1)");
    const Resolvent r{static_cast<double>(k1) * k1, d_pm(k1, p), p};
    const double c = -(1.0 - opt.gamma) * r.k1sq;
    auto lam = [&](double y) { return cplx{c, r.k1sq * y}; };

    double t_max = 0.0;
    for (double t : times) {
        if (t < 0.0) throw InvalidInput("h_samples: negative time");
        t_max = std::max(t_max, t);
    }
    // Trapezoid error ~ exp(-2 pi a / h + k1^2 a t) for a strip of half-width a = gamma/2.
    const double a = 0.5 * opt.gamma;
    const double h = 2.0 * pi * a / (36.0 + r.k1sq * a * t_max);

    // Tail of int_Y^inf |H~_rem| dy for a y^{-(n-2)/2} envelope.
    const int n_total = g_terms + 1 + opt.asymptotic_terms;
    const double decay_power = 0.5 * (n_total - 2);
    const double scale = std::pow(std::abs(k1), 3);
    double y_end = opt.y_start;
    for (;;) {
        const double tail = (r.k1sq / pi) * std::abs(r.remainder(lam(y_end), opt.asymptotic_terms)) * y_end /
                            (decay_power - 1.0);
        if (tail <= opt.tol * scale) break;
        y_end *= 2.0;
        if (y_end > opt.y_max)
            throw NumericalFailure("h_samples: Bromwich tail estimate " + std::to_string(tail) +
                                   " above tolerance at k1=" + std::to_string(k1));
    }
    const auto n_nodes = static_cast<std::size_t>(std::ceil(y_end / h));
    std::vector<cplx> f(n_nodes + 1);
    for (std::size_t j = 0; j <= n_nodes; ++j) f[j] = r.remainder(lam(j * h), opt.asymptotic_terms);
    f[0] *= 0.5;

    std::vector<double> out(times.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const double w = r.k1sq * h * t;
        const cplx rot = std::polar(1.0, w);
        cplx ph = 1.0;
        double s = 0.0;
        for (std::size_t j = 0; j <= n_nodes; ++j) {
            if (j % 512 == 0) ph = std::polar(1.0, w * static_cast<double>(j));
            s += (ph * f[j]).real();
            ph *= rot;
        }
        out[i] = (r.k1sq / pi) * std::exp(c * t) * h * s;
    }
    return out;
}

}  // namespace

std::vector<double> h_samples(int k1, Parity p, std::span<const double> times, const BromwichOptions& opt) {
    auto out = bromwich_remainder(k1, p, times, opt);
    const Resolvent r{static_cast<double>(k1) * k1, d_pm(k1, p), p};
    for (std::size_t i = 0; i < times.size(); ++i) out[i] += r.asymptotic_inverse(times[i], opt.asymptotic_terms);
    return out;
}

std::vector<double> gh_representation_flux(int k1, Parity p, double dt, std::span<const double> g,
                                           std::span<const double> gprime, const BromwichOptions& opt) {
    if (g.size() != gprime.size()) throw InvalidInput("gh_representation_flux: g and g' lengths differ");
    if (!(dt > 0.0)) throw InvalidInput("gh_representation_flux: dt must be positive");
    const std::size_t n = g.size();
    if (n == 0) return {};
    const double d = d_pm(k1, p);
    const double s0 = 0.5 * pi / d;

    // g' ~ S0 a(0) - c a(0) sqrt(t) near 0, which a linear interpolant cannot follow.
    // Remove the data of the constant solution a(0) (exact in terms of the kernel
    // integrals) and represent only the remainder.
    const double a0 = gprime[0] / s0;
    const auto kw = quadrature_lag_weights([&](double tau) { return singular_kernel(k1, tau, p); }, dt,
                                           static_cast<int>(n));
    std::vector<double> gr(n), gpr(n);
    double kint = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double moment = 0.0;  // int_0^t (t - tau) K(tau) dtau
        for (std::size_t m = 0; m < i; ++m)
            moment += kw.near[m] * (t - static_cast<double>(m) * dt) + kw.far[m] * (t - static_cast<double>(m + 1) * dt);
        if (i > 0) kint += kw.near[i - 1] + kw.far[i - 1];
        gr[i] = g[i] - a0 * (s0 * t - moment);
        gpr[i] = gprime[i] - a0 * (s0 - kint);
    }

    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = static_cast<double>(i) * dt;
    // H = analytic large-z part (sqrt(t)-type at 0, product-integrated) + smooth Bromwich remainder (trapezoid).
    const auto h = bromwich_remainder(k1, p, times, opt);
    const Resolvent r{static_cast<double>(k1) * k1, d, p};
    const auto hw = quadrature_lag_weights([&](double tau) { return r.asymptotic_inverse(tau, opt.asymptotic_terms); },
                                           dt, static_cast<int>(n));
    const auto gw = quadrature_lag_weights([&](double tau) { return g_singular(k1, tau, p); }, dt,
                                           static_cast<int>(n));
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = a0 + (2.0 / pi) * d * gpr[i];
        for (std::size_t m = 0; m < i; ++m)
            s += gw.near[m] * gpr[i - m] + gw.far[m] * gpr[i - 1 - m] + hw.near[m] * gr[i - m] + hw.far[m] * gr[i - 1 - m];
        if (i > 0) {
            double tr = 0.5 * (h[i] * gr[0] + h[0] * gr[i]);
            for (std::size_t j = 1; j < i; ++j) tr += h[i - j] * gr[j];
            s += dt * tr;
        }
        a[i] = s;
    }
    return a;
}

std::vector<cplx> gh_representation_flux(int k1, Parity p, double dt, std::span<const cplx> g,
                                         std::span<const cplx> gprime, const BromwichOptions& opt) {
    std::vector<double> gr(g.size()), gi(g.size()), pr(gprime.size()), pi_(gprime.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        gr[i] = g[i].real();
        gi[i] = g[i].imag();
    }
    for (std::size_t i = 0; i < gprime.size(); ++i) {
        pr[i] = gprime[i].real();
        pi_[i] = gprime[i].imag();
    }
    const auto ar = gh_representation_flux(k1, p, dt, gr, pr, opt);
    const auto ai = gh_representation_flux(k1, p, dt, gi, pi_, opt);
    std::vector<cplx> a(ar.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = {ar[i], ai[i]};
    return a;
}

}  // namespace flatcyl
