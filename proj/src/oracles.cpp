#include "flatcyl/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace flatcyl::oracle {

namespace {

const cplx I{0.0, 1.0};

// Legendre P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

// Column sums over k2 at one x2 for every k1: omega, d2 omega, u1, u2.
struct Columns {
    std::vector<cplx> w, w2, u1, u2;
};

Columns columns_at(const SpectrumField& f, double x2) {
    const auto& tr = f.truncation();
    Columns c{std::vector<cplx>(tr.n1()), std::vector<cplx>(tr.n1()), std::vector<cplx>(tr.n1()),
              std::vector<cplx>(tr.n1())};
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        const int i = k1 + tr.k1max;
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const cplx a = f(k1, k2);
            const double wt = k2 == 0 ? 1.0 : 2.0;
            const double cs = std::cos(k2 * x2), sn = std::sin(k2 * x2);
            c.w[i] += wt * a * cs;
            c.w2[i] += -wt * k2 * a * sn;
            const int kk = k1 * k1 + k2 * k2;
            if (kk == 0) continue;
            c.u1[i] += (-2.0 * k2 / kk) * a * sn;
            c.u2[i] += (-I * static_cast<double>(k1) / static_cast<double>(kk)) * wt * a * cs;
        }
    }
    return c;
}

double sum_k1(const std::vector<cplx>& col, int k1max, double x1, bool derivative = false) {
    cplx s{};
    for (int k1 = -k1max; k1 <= k1max; ++k1) {
        cplx v = col[k1 + k1max] * std::polar(1.0, k1 * x1);
        if (derivative) v *= I * static_cast<double>(k1);
        s += v;
    }
    return s.real();
}

}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw InvalidInput("gauss_legendre: n must be >= 1");
    // Golub-Welsch for starting nodes, then Newton polish and the derivative formula for weights.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int i = 1; i < n; ++i) sub(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::EigenvaluesOnly);
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double t = es.eigenvalues()(i), p = 0.0, dp = 0.0;
        for (int it = 0; it < 3; ++it) {
            legendre(n, t, p, dp);
            t -= p / dp;
        }
        legendre(n, t, p, dp);
        x[i] = 0.5 * (b - a) * t + 0.5 * (b + a);
        w[i] = (b - a) / ((1.0 - t * t) * dp * dp);
    }
}

NonlinearTerm pseudospectral_nonlinear(const SpectrumField& field, int oversample) {
    if (oversample < 2) throw InvalidInput("pseudospectral_nonlinear: oversample must be >= 2 to avoid aliasing");
    const auto& tr = field.truncation();
    const int n1 = oversample * tr.n1();
    const int n2 = 6 * tr.k2max + 40;
    std::vector<double> xg, wg;
    gauss_legendre(n2, 0.0, pi, xg, wg);
    NonlinearTerm out(tr);
    // Q[m][k1]: x1-projection of the product at the m-th x2 node.
    std::vector<std::vector<cplx>> q(n2, std::vector<cplx>(tr.n1()));
#pragma omp parallel for schedule(static)
    for (int m = 0; m < n2; ++m) {
        const Columns c = columns_at(field, xg[m]);
        for (int j = 0; j < n1; ++j) {
            const double x1 = -pi + 2.0 * pi * j / n1;
            const double u1 = sum_k1(c.u1, tr.k1max, x1), u2 = sum_k1(c.u2, tr.k1max, x1);
            const double d1 = sum_k1(c.w, tr.k1max, x1, true), d2 = sum_k1(c.w2, tr.k1max, x1);
            const double prod = u1 * d1 + u2 * d2;
            for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
                q[m][k1 + tr.k1max] += prod * std::polar(1.0, -k1 * x1) * (2.0 * pi / n1);
        }
    }
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            cplx s{};
            for (int m = 0; m < n2; ++m) s += wg[m] * std::cos(k2 * xg[m]) * q[m][k1 + tr.k1max];
            out(k1, k2) = s / (2.0 * pi * pi);
        }
    return out;
}

std::vector<double> volterra_forward(std::span<const double> a, double dt, int k1, int k2max, Parity p) {
    const std::size_t n = a.size();
    std::vector<double> b(n, 0.0);
    for (int k2 = p == Parity::even ? 0 : 1; k2 <= k2max; k2 += 2) {
        const double kap = static_cast<double>(k1 * k1 + k2 * k2);
        const double wt = k2 == 0 ? 1.0 : 2.0;
        const double one = -std::expm1(-kap * dt) / kap;          // int_0^dt e^{-kap (dt - u)} du
        const double lin = dt / kap - (-std::expm1(-kap * dt)) / (kap * kap);  // int_0^dt e^{-kap (dt - u)} u du
        for (std::size_t i = 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                const double decay = std::exp(-kap * dt * static_cast<double>(i - 1 - j));
                const double slope = (a[j + 1] - a[j]) / dt;
                s += decay * (a[j] * one + slope * lin);
            }
            b[i] += wt * s / kap;
        }
    }
    return b;
}

HeatKernelPair heat_kernel_dual(double t, double x2, double x2p) {
    if (!(t > 0.0)) throw InvalidInput("heat_kernel_dual: t must be positive");
    const double eps = 1e-15;
    HeatKernelPair r;
    // Cosine series; tail sum_{k>K} e^{-k^2 t} <= e^{-(K+1)^2 t} / (1 - e^{-(2K+3) t}).
    double s = 1.0 / pi;
    for (int k = 1;; ++k) {
        s += (2.0 / pi) * std::exp(-static_cast<double>(k) * k * t) * std::cos(k * x2) * std::cos(k * x2p);
        const double tail = (2.0 / pi) * std::exp(-static_cast<double>(k + 1) * (k + 1) * t) /
                            (1.0 - std::exp(-(2.0 * k + 3.0) * t));
        if (tail < eps) {
            r.series_tail = tail;
            break;
        }
    }
    r.series = s;
    // Images; |x2 +/- x2' + 2 n pi| >= 2 pi (|n| - 1) for |n| >= 1.
    const double norm = 1.0 / std::sqrt(4.0 * pi * t);
    auto p = [&](double y) { return norm * std::exp(-y * y / (4.0 * t)); };
    double g = p(x2 - x2p) + p(x2 + x2p);
    for (int n = 1;; ++n) {
        g += p(x2 - x2p + 2.0 * n * pi) + p(x2 + x2p + 2.0 * n * pi) + p(x2 - x2p - 2.0 * n * pi) +
             p(x2 + x2p - 2.0 * n * pi);
        // remaining |m| >= n + 1: 4 terms each <= norm e^{-pi^2 m^2 / t}
        const double q = std::exp(-pi * pi * static_cast<double>(n) * n / t);
        const double tail = 4.0 * norm * q / (1.0 - std::exp(-pi * pi * (2.0 * n + 1.0) / t));
        if (tail < eps) {
            r.images_tail = tail;
            break;
        }
    }
    r.images = g;
    return r;
}

GridField sample(const SpectrumField& field, int n1, int n2) {
    if (n1 < 2 || n2 < 4 || n1 % 2 != 0) throw InvalidInput("sample: need even n1 and n2 >= 4");
    const auto& tr = field.truncation();
    GridField g{n1, n2, 2.0 * pi / n1, pi / (n2 - 1), std::vector<double>(static_cast<std::size_t>(n1) * n2)};
    for (int m = 0; m < n2; ++m) {
        const Columns c = columns_at(field, m * g.h2);
        for (int j = 0; j < n1; ++j) g.v[static_cast<std::size_t>(j) * n2 + m] = sum_k1(c.w, tr.k1max, -pi + j * g.h1);
    }
    return g;
}

SpectrumField grid_project(const GridField& g, Truncation tr) {
    if (g.n1 <= 2 * tr.k1max || g.n2 - 1 <= tr.k2max) throw InvalidInput("grid_project: grid too coarse");
    SpectrumField f(tr);
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            cplx s{};
            for (int j = 0; j < g.n1; ++j) {
                const cplx e = std::polar(1.0, -k1 * (-pi + j * g.h1));
                for (int m = 0; m < g.n2; ++m) {
                    const double wm = (m == 0 || m == g.n2 - 1) ? 0.5 : 1.0;
                    s += wm * g(j, m) * std::cos(k2 * m * g.h2) * e;
                }
            }
            f(k1, k2) = s * g.h1 * g.h2 / (2.0 * pi * pi);
        }
    return f;
}

double fd_divergence_max(const SpectrumField& field, int n) {
    const auto& tr = field.truncation();
    const double h = 2.0 * pi / n;
    std::vector<double> u1(static_cast<std::size_t>(n) * n), u2(u1.size());
    for (int m = 0; m < n; ++m) {
        const Columns c = columns_at(field, -pi + m * h);
        for (int j = 0; j < n; ++j) {
            u1[static_cast<std::size_t>(j) * n + m] = sum_k1(c.u1, tr.k1max, -pi + j * h);
            u2[static_cast<std::size_t>(j) * n + m] = sum_k1(c.u2, tr.k1max, -pi + j * h);
        }
    }
    const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    auto at = [&](const std::vector<double>& v, int j, int m) {
        return v[static_cast<std::size_t>((j % n + n) % n) * n + (m % n + n) % n];
    };
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int m = 0; m < n; ++m) {
            double d = 0.0;
            for (int s = 1; s <= 4; ++s)
                d += c[s - 1] * (at(u1, j + s, m) - at(u1, j - s, m) + at(u2, j, m + s) - at(u2, j, m - s));
            worst = std::max(worst, std::abs(d / h));
        }
    return worst;
}

double grid_kinetic_energy(const SpectrumField& field, int n1, int n2) {
    const auto& tr = field.truncation();
    if (n1 <= 2 * tr.k1max || n2 - 1 <= 2 * tr.k2max) throw InvalidInput("grid_kinetic_energy: grid too coarse");
    const double h1 = 2.0 * pi / n1, h2 = pi / (n2 - 1);
    double s = 0.0;
    for (int m = 0; m < n2; ++m) {
        const Columns c = columns_at(field, m * h2);
        const double wm = (m == 0 || m == n2 - 1) ? 0.5 : 1.0;
        for (int j = 0; j < n1; ++j) {
            const double a = sum_k1(c.u1, tr.k1max, -pi + j * h1), b = sum_k1(c.u2, tr.k1max, -pi + j * h1);
            s += wm * (a * a + b * b);
        }
    }
    return s * h1 * h2 / (2.0 * pi * pi);
}

}  // namespace flatcyl::oracle
