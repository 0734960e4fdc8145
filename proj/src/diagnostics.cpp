#include "flatcyl/diagnostics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "text_io.hpp"

namespace flatcyl {

namespace {

int default_n(int n, int k) { return n > 0 ? n : 2 * k + 2; }

double wall_max(const GridSamples& g) {
    double m = 0.0;
    for (int j = 0; j < g.n1; ++j) m = std::max({m, std::abs(g(j, 0)), std::abs(g(j, g.n2 - 1))});
    return m;
}

}  // namespace

cplx lemma2_sum(const HatArray& r) {
    cplx s{};
    for (int h = -r.k2max(); h <= r.k2max(); ++h) {
        if (h == 0 || h % 2 != 0) continue;
        s += r(0, h) * (0.5 * pi / h);
    }
    return cplx{0.0, 1.0} * s;
}

cplx lemma2_truncated(const ModeArray& nonlinear) {
    const auto& tr = nonlinear.truncation();
    cplx s{};
    for (int k2 = 1; k2 <= tr.k2max; k2 += 2) s += 2.0 * nonlinear(0, k2) / static_cast<double>(k2 * k2);
    return s;
}

double momentum_x1(const ModeArray& field) {
    const auto& tr = field.truncation();
    double s = 0.0;
    for (int k2 = 1; k2 <= tr.k2max; k2 += 2) s += 2.0 * field(0, k2).real() / static_cast<double>(k2 * k2);
    return -4.0 * pi * s;
}

double boundary_trace_integral(const ModeArray& field, int n1, int n2) {
    const auto g = evaluate_on_grid(field, n1, n2);
    double s = 0.0;
    for (int j = 0; j < g.n1; ++j) s += g(j, 0) - g(j, g.n2 - 1);
    return s * 2.0 * pi / g.n1;
}

DiagnosticsRecord record(const SpectrumField& field, const RecordOptions& opt, const HatArray* convolution) {
    const auto& tr = field.truncation();
    DiagnosticsRecord r;
    r.t = field.time;
    const auto ue = energy_enstrophy(field);
    r.U = ue.energy;
    r.E = ue.enstrophy;
    r.max_constraint_residual = max_constraint_residual(field);
    r.mean_vorticity = field(0, 0);
    r.momentum_x1 = momentum_x1(field);
    const int n1 = default_n(opt.n1, tr.k1max), n2 = default_n(opt.n2, tr.k2max);
    r.boundary_trace = boundary_trace_integral(field, n1, n2);
    const auto u = evaluate_on_grid(velocity_from_vorticity(field), n1, n2);
    r.boundary_u1_max = wall_max(u.u1);
    r.boundary_u2_max = wall_max(u.u2);
    HatArray local;
    if (!convolution) {
        TransformConvolution tc(tr);
        local = tc(field);
        convolution = &local;
    }
    r.lemma2_sum = lemma2_sum(*convolution);
    r.lemma2_truncated = lemma2_truncated(reexpand_to_neumann(*convolution, tr));
    r.norm_alpha = weighted_norm(field, opt.alpha, opt.beta, field.time);
    return r;
}

double energy_identity_residual(double U0, double U1, double E0, double E1, double dt) {
    return (U1 - U0) / dt + (E0 + E1);
}

std::vector<double> momentum_balance_series(std::span<const double> momentum, std::span<const double> trace,
                                            double dt) {
    if (momentum.size() != trace.size()) throw InvalidInput("momentum_balance_series: length mismatch");
    if (momentum.size() < 3) throw InvalidInput("momentum_balance: window needs at least 3 snapshots");
    std::vector<double> out(momentum.size() - 2);
    for (std::size_t i = 1; i + 1 < momentum.size(); ++i)
        out[i - 1] = std::abs((momentum[i + 1] - momentum[i - 1]) / (2.0 * dt) - trace[i]);
    return out;
}

double momentum_balance_residual(std::span<const SpectrumField> window, double dt) {
    if (window.size() < 3) throw InvalidInput("momentum_balance: window needs at least 3 snapshots");
    const auto& tr = window[0].truncation();
    const std::size_t mid = window.size() / 2;
    const double p0 = momentum_x1(window[mid - 1]), p1 = momentum_x1(window[mid + 1]);
    const double b = boundary_trace_integral(window[mid], 2 * tr.k1max + 2, 2 * tr.k2max + 2);
    return std::abs((p1 - p0) / (2.0 * dt) - b);
}

DecayFit decay_fit(const SpectrumField& field, int k1_lim, int k2_lim, double floor) {
    const double t = field.time;
    if (!(t > 0.0)) throw InvalidInput("decay_fit: requires t > 0");
    const auto& tr = field.truncation();
    k1_lim = std::min(k1_lim, tr.k1max);
    k2_lim = std::min(k2_lim, tr.k2max);
    struct Row {
        int k1, k2;
        double logw;
    };
    std::vector<Row> rows;
    for (int k1 = -k1_lim; k1 <= k1_lim; ++k1)
        for (int k2 = 0; k2 <= k2_lim; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double a = std::abs(field(k1, k2));
            if (a > floor) rows.push_back({k1, k2, std::log(a)});
        }
    if (rows.size() < 4) throw InvalidInput("decay_fit: fewer than 4 modes above the noise floor");
    Eigen::MatrixXd X(rows.size(), 3);
    Eigen::VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        X(i, 0) = 1.0;
        X(i, 1) = -(1.0 + std::abs(r.k1)) * t;
        X(i, 2) = -0.5 * std::log(static_cast<double>(r.k1 * r.k1 + r.k2 * r.k2));
        y(i) = r.logw;
    }
    const Eigen::Vector3d c = X.colPivHouseholderQr().solve(y);
    DecayFit f;
    f.D = std::exp(c(0));
    f.nu = c(1);
    f.power = c(2);
    f.modes = static_cast<int>(rows.size());
    f.rms_residual = std::sqrt((X * c - y).squaredNorm() / static_cast<double>(rows.size()));
    f.fitted_bound_holds = true;
    for (const auto& r : rows) {
        const double kk = static_cast<double>(r.k1 * r.k1 + r.k2 * r.k2);
        const double a = std::exp(r.logw);
        const double rate = f.nu * (1.0 + std::abs(r.k1)) * t;
        f.D_envelope = std::max(f.D_envelope, a * kk * std::exp(0.5 * rate));
        if (a > f.D * std::exp(-rate) / kk) f.fitted_bound_holds = false;
    }
    return f;
}

DecayFit decay_fit(const SpectrumField& field) {
    const auto& tr = field.truncation();
    return decay_fit(field, (2 * tr.k1max) / 3, (2 * tr.k2max) / 3);
}

K2Profile k2_profile(const SpectrumField& field, int k1, int k2_lo, int k2_hi, double floor) {
    const auto& tr = field.truncation();
    k2_hi = std::min(k2_hi, tr.k2max);
    std::vector<double> ks, logs;
    for (int k2 = std::max(k2_lo, 0); k2 <= k2_hi; ++k2) {
        const double a = std::abs(field(k1, k2));
        if (a > floor && (k1 != 0 || k2 != 0)) {
            ks.push_back(k2);
            logs.push_back(std::log(a));
        }
    }
    if (ks.size() < 3) throw InvalidInput("k2_profile: fewer than 3 modes above the noise floor");
    auto fit = [&](auto xf, double& slope, double& rms) {
        Eigen::MatrixXd X(ks.size(), 2);
        Eigen::VectorXd y(ks.size());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = -xf(ks[i]);
            y(i) = logs[i];
        }
        const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
        slope = c(1);
        rms = std::sqrt((X * c - y).squaredNorm() / static_cast<double>(ks.size()));
    };
    K2Profile p;
    p.modes = static_cast<int>(ks.size());
    fit([](double k2) { return k2; }, p.exp_rate, p.exp_rms);
    fit([&](double k2) { return 0.5 * std::log(static_cast<double>(k1) * k1 + k2 * k2); }, p.power, p.power_rms);
    return p;
}

double weighted_norm(const ModeArray& field, double alpha, double beta, std::optional<double> t) {
    if (alpha < 0.0 || beta < 0.0) throw InvalidInput("weighted_norm: alpha and beta must be >= 0");
    const auto& tr = field.truncation();
    double m = 0.0;
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const double a = std::abs(field(k1, k2));
            if (a == 0.0) continue;
            const double kabs = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
            double w = a * std::pow(kabs, alpha);
            if (t) w *= std::exp((1.0 + std::abs(k1)) * *t / 4.0) * (1.0 + std::pow(std::abs(k1), beta));
            m = std::max(m, w);
        }
    return m;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "step",           "t",
        "U",              "E",
        "max_constraint_residual", "mean_vorticity_re",
        "mean_vorticity_im", "momentum_x1",
        "boundary_trace", "momentum_balance_residual",
        "energy_identity_residual", "boundary_u1_max",
        "boundary_u2_max", "lemma2_sum_re",
        "lemma2_sum_im",  "lemma2_truncated_re",
        "lemma2_truncated_im", "norm_alpha",
        "picard_iterations"};
    return cols;
}

void write_csv_header(std::ostream& os) {
    const auto& c = csv_columns();
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << '\n';
}

void write_csv_row(std::ostream& os, long step, const DiagnosticsRecord& r, double energy_residual,
                   double momentum_residual, int picard_iterations) {
    using detail::fmt_double;
    auto num = [](double v) { return std::isnan(v) ? std::string() : fmt_double(v); };
    os << step << ',' << fmt_double(r.t) << ',' << fmt_double(r.U) << ',' << fmt_double(r.E) << ','
       << fmt_double(r.max_constraint_residual) << ',' << fmt_double(r.mean_vorticity.real()) << ','
       << fmt_double(r.mean_vorticity.imag()) << ',' << fmt_double(r.momentum_x1) << ','
       << fmt_double(r.boundary_trace) << ',' << num(momentum_residual) << ',' << num(energy_residual) << ','
       << fmt_double(r.boundary_u1_max) << ',' << fmt_double(r.boundary_u2_max) << ','
       << fmt_double(r.lemma2_sum.real()) << ',' << fmt_double(r.lemma2_sum.imag()) << ','
       << fmt_double(r.lemma2_truncated.real()) << ',' << fmt_double(r.lemma2_truncated.imag()) << ','
       << fmt_double(r.norm_alpha) << ',' << picard_iterations << '\n';
}

}  // namespace flatcyl
