#include "flatcyl/spectral_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace flatcyl {

namespace {

constexpr cplx I{0.0, 1.0};

void require_grid(int n1, int n2, int k1max, int k2max) {
    if (n2 < 2) throw InvalidInput("evaluate_on_grid: n2 must be >= 2 to hold both wall rows");
    if (n1 < 2 * k1max || n2 < 2 * k2max)
        throw InvalidInput("evaluate_on_grid: grid " + std::to_string(n1) + "x" + std::to_string(n2) +
                           " too coarse for truncation (" + std::to_string(k1max) + "," +
                           std::to_string(k2max) + "), need n >= 2K");
}

// Sums columns col[k1 + K1][m] against e^{i k1 x1_j}; keeps the real part after
// checking that the imaginary residue is negligible against `scale`.
GridSamples sum_over_k1(const std::vector<std::vector<cplx>>& col, int k1max, int n1, int n2, double scale) {
    GridSamples g{n1, n2, std::vector<double>(static_cast<std::size_t>(n1) * n2)};
    const double tol = 1e-12 * std::max(1.0, scale);
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (int j = 0; j < n1; ++j) {
        const double x1 = g.x1(j);
        std::vector<cplx> phase(2 * k1max + 1);
        for (int k1 = -k1max; k1 <= k1max; ++k1) phase[k1 + k1max] = std::polar(1.0, k1 * x1);
        for (int m = 0; m < n2; ++m) {
            cplx s{};
            for (int k1 = -k1max; k1 <= k1max; ++k1) s += phase[k1 + k1max] * col[k1 + k1max][m];
            g(j, m) = s.real();
            worst = std::max(worst, std::abs(s.imag()));
        }
    }
    if (worst > tol)
        throw InvalidInput("evaluate_on_grid: imaginary residue " + std::to_string(worst) +
                           " exceeds tolerance; coefficients are not conjugate-symmetric");
    return g;
}

GridSamples evaluate_hat_series(const HatArray& c, int n1, int n2) {
    const int K1 = c.k1max(), L = c.k2max();
    require_grid(n1, n2, K1, L);
    GridSamples probe{n1, n2, {}};
    std::vector<std::vector<cplx>> col(2 * K1 + 1, std::vector<cplx>(n2));
    double scale = 0.0;
    for (const auto& v : c.data()) scale += std::abs(v);
    for (int k1 = -K1; k1 <= K1; ++k1)
        for (int m = 0; m < n2; ++m) {
            const double x2 = probe.x2(m);
            cplx s{};
            for (int k2 = -L; k2 <= L; ++k2) s += c(k1, k2) * std::polar(1.0, k2 * x2);
            col[k1 + K1][m] = s;
        }
    return sum_over_k1(col, K1, n1, n2, scale);
}

}  // namespace

VelocitySpectrum velocity_from_vorticity(const SpectrumField& field) {
    const auto& tr = field.truncation();
    if (std::abs(field(0, 0)) > invariant_rel_tol * std::max(field.max_abs(), 1e-300))
        throw InvalidInput("velocity_from_vorticity: omega_{0,0} != 0, velocity undefined");
    VelocitySpectrum u{HatArray(tr.k1max, tr.k2max), HatArray(tr.k1max, tr.k2max)};
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = -tr.k2max; k2 <= tr.k2max; ++k2) {
            const int kk = k1 * k1 + k2 * k2;
            if (kk == 0) continue;
            const cplx w = field.hat(k1, k2) / static_cast<double>(kk);
            // -i k_perp w with k_perp = (-k2, k1)
            u.u1(k1, k2) = I * static_cast<double>(k2) * w;
            u.u2(k1, k2) = -I * static_cast<double>(k1) * w;
        }
    return u;
}

GridSamples evaluate_on_grid(const ModeArray& field, int n1, int n2) {
    const auto& tr = field.truncation();
    require_grid(n1, n2, tr.k1max, tr.k2max);
    GridSamples probe{n1, n2, {}};
    std::vector<std::vector<double>> cosines(tr.n2(), std::vector<double>(n2));
    for (int k2 = 0; k2 <= tr.k2max; ++k2)
        for (int m = 0; m < n2; ++m) cosines[k2][m] = std::cos(k2 * probe.x2(m));
    std::vector<std::vector<cplx>> col(tr.n1(), std::vector<cplx>(n2));
    double scale = 0.0;
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const cplx w = neumann_weight(k2) * field(k1, k2);
            scale += std::abs(w);
            for (int m = 0; m < n2; ++m) col[k1 + tr.k1max][m] += w * cosines[k2][m];
        }
    return sum_over_k1(col, tr.k1max, n1, n2, scale);
}

VelocityGrid evaluate_on_grid(const VelocitySpectrum& u, int n1, int n2) {
    return {evaluate_hat_series(u.u1, n1, n2), evaluate_hat_series(u.u2, n1, n2)};
}

double sine_cosine_coefficient(int q, int p) {
    if (((q + p) % 2 + 2) % 2 == 0) return 0.0;
    // q + p odd, so q^2 != p^2
    assert(q * q != p * p);
    return (2.0 * q / pi) / static_cast<double>(q * q - p * p);
}

HatArray hat_convolution(const ModeArray& field) {
    const auto& tr = field.truncation();
    const int K1 = tr.k1max, K2 = tr.k2max;
    HatArray w(K1, K2), wk(K1, K2);
    for (int j1 = -K1; j1 <= K1; ++j1)
        for (int j2 = -K2; j2 <= K2; ++j2) {
            w(j1, j2) = field.hat(j1, j2);
            const int jj = j1 * j1 + j2 * j2;
            wk(j1, j2) = jj == 0 ? cplx{} : w(j1, j2) / static_cast<double>(jj);
        }
    HatArray r(K1, 2 * K2);
#pragma omp parallel for schedule(static)
    for (int k1 = -K1; k1 <= K1; ++k1) {
        const int j1lo = std::max(-K1, k1 - K1), j1hi = std::min(K1, k1 + K1);
        for (int h2 = -2 * K2; h2 <= 2 * K2; ++h2) {
            const int j2lo = std::max(-K2, h2 - K2), j2hi = std::min(K2, h2 + K2);
            cplx s{};
            for (int j1 = j1lo; j1 <= j1hi; ++j1) {
                const int l1 = k1 - j1;
                for (int j2 = j2lo; j2 <= j2hi; ++j2) {
                    if (j1 == 0 && j2 == 0) continue;
                    const int l2 = h2 - j2;
                    const double cross = static_cast<double>(-j2 * l1 + j1 * l2);
                    if (cross == 0.0) continue;
                    s += cross * wk(j1, j2) * w(l1, l2);
                }
            }
            r(k1, h2) = s;
        }
    }
    return r;
}

NonlinearTerm reexpand_to_neumann(const HatArray& r, Truncation tr) {
    const int L = r.k2max();
    std::vector<double> a(static_cast<std::size_t>(2 * L + 1) * tr.n2());
    for (int h2 = -L; h2 <= L; ++h2)
        for (int k2 = 0; k2 <= tr.k2max; ++k2)
            a[static_cast<std::size_t>(h2 + L) * tr.n2() + k2] = sine_cosine_coefficient(h2, k2);
    NonlinearTerm n(tr);
#pragma omp parallel for schedule(static)
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            cplx s{};
            for (int h2 = -L; h2 <= L; ++h2) {
                const double coef = a[static_cast<std::size_t>(h2 + L) * tr.n2() + k2];
                if (coef != 0.0) s += coef * r(k1, h2);
            }
            n(k1, k2) = I * s;
        }
    return n;
}

NonlinearTerm nonlinear_term(const SpectrumField& field) {
    return reexpand_to_neumann(hat_convolution(field), field.truncation());
}

NonlinearEvaluator::NonlinearEvaluator(Truncation tr, ConvolutionPath path) : tr_(tr), path_(path) {
    if (path_ == ConvolutionPath::transform) transform_ = std::make_unique<TransformConvolution>(tr);
}

HatArray NonlinearEvaluator::convolution(const SpectrumField& field) {
    if (!(field.truncation() == tr_)) throw InvalidInput("NonlinearEvaluator: truncation mismatch");
    return path_ == ConvolutionPath::transform ? (*transform_)(field) : hat_convolution(field);
}

NonlinearTerm NonlinearEvaluator::operator()(const SpectrumField& field) {
    return reexpand_to_neumann(convolution(field), tr_);
}

std::vector<ConstraintResidual> constraint_residuals(const ModeArray& field) {
    const auto& tr = field.truncation();
    std::vector<ConstraintResidual> out;
    out.reserve(2 * tr.k1max);
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        if (k1 == 0) continue;
        ConstraintResidual r{k1, {}, {}};
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const cplx term = neumann_weight(k2) * field(k1, k2) / static_cast<double>(k1 * k1 + k2 * k2);
            (k2 % 2 == 0 ? r.even : r.odd) += term;
        }
        out.push_back(r);
    }
    return out;
}

double max_constraint_residual(const ModeArray& field) {
    double m = 0.0;
    for (const auto& r : constraint_residuals(field)) m = std::max({m, std::abs(r.even), std::abs(r.odd)});
    return m;
}

SpectrumField project_well_prepared(const SpectrumField& field) {
    const auto& tr = field.truncation();
    if (tr.k2max < 3) throw InvalidInput("project_well_prepared: requires K2 >= 3");
    SpectrumField out = field;
    out(0, 0) = 0.0;
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        if (k1 == 0) continue;
        const double kk1 = static_cast<double>(k1) * k1;
        cplx even_rest{}, odd_rest{};
        for (int k2 = 2; k2 <= tr.k2max; ++k2) {
            const cplx term = 2.0 * field(k1, k2) / (kk1 + static_cast<double>(k2) * k2);
            (k2 % 2 == 0 ? even_rest : odd_rest) += term;
        }
        // omega_{k1,0}/k1^2 + even_rest = 0 and 2 omega_{k1,1}/(k1^2+1) + odd_rest = 0
        out(k1, 0) = -kk1 * even_rest;
        out(k1, 1) = -0.5 * (kk1 + 1.0) * odd_rest;
    }
    return out;
}

EnergyEnstrophy energy_enstrophy(const ModeArray& field) {
    const auto& tr = field.truncation();
    EnergyEnstrophy ue;
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const double a2 = std::norm(field(k1, k2)) * neumann_weight(k2);
            ue.enstrophy += a2;
            const int kk = k1 * k1 + k2 * k2;
            if (kk != 0) ue.energy += a2 / kk;
        }
    return ue;
}

}  // namespace flatcyl
