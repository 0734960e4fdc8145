#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "flatcyl/diagnostics.hpp"
#include "flatcyl/evolution.hpp"
#include "flatcyl/run_config.hpp"
#include "support.hpp"

using namespace flatcyl;

namespace {

SpectrumField envelope_data(Truncation tr, double D0, std::uint64_t seed) {
    RunConfig rc;
    rc.truncation = tr;
    rc.D0 = D0;
    rc.seed = seed;
    return generate_initial_data(rc);
}

}  // namespace

TEST(Record, ZeroField) {
    const auto r = record(SpectrumField(Truncation{4, 8}));
    EXPECT_EQ(r.U, 0.0);
    EXPECT_EQ(r.E, 0.0);
    EXPECT_EQ(r.max_constraint_residual, 0.0);
    EXPECT_EQ(r.mean_vorticity, cplx{});
    EXPECT_EQ(r.momentum_x1, 0.0);
    EXPECT_EQ(r.boundary_trace, 0.0);
    EXPECT_EQ(r.boundary_velocity_max(), 0.0);
    EXPECT_EQ(r.lemma2_sum, cplx{});
    EXPECT_EQ(r.lemma2_truncated, cplx{});
    EXPECT_EQ(r.norm_alpha, 0.0);
}

TEST(Record, ConstrainedFieldIdentities) {
    const auto w = envelope_data(Truncation{12, 48}, 0.5, 8);
    const auto r = record(w);
    EXPECT_GT(r.E, 0.0);
    EXPECT_GE(r.E, r.U);
    EXPECT_LT(std::abs(r.lemma2_sum), 1e-10 * r.E);
    EXPECT_LT(r.max_constraint_residual, 1e-14);
    const double scale = w.max_abs();
    EXPECT_LT(r.boundary_u1_max, 1e-13 * scale);  // sine series vanishes at the walls
    EXPECT_LT(r.boundary_u2_max, 1e-13 * scale);  // tied to the constraint sums
}

TEST(Record, WallVelocityTracksConstraintResidual) {
    const auto w = envelope_data(Truncation{6, 16}, 0.5, 2);
    auto perturbed = [&](double eps) {
        auto v = w;
        v(2, 5) += eps;
        v(-2, 5) += eps;
        return record(v);
    };
    const auto a = perturbed(1e-6), b = perturbed(2e-6);
    EXPECT_GT(a.max_constraint_residual, 0.0);
    EXPECT_NEAR(b.boundary_u2_max / a.boundary_u2_max, 2.0, 1e-6);
    EXPECT_NEAR(b.max_constraint_residual / a.max_constraint_residual, 2.0, 1e-6);
    EXPECT_LT(a.boundary_u1_max, 1e-13);
}

TEST(Momentum, ShortWindowRejectedAndZeroFlow) {
    std::vector<SpectrumField> two(2, SpectrumField(Truncation{4, 4}));
    EXPECT_THROW(momentum_balance_residual(two, 1e-3), InvalidInput);
    std::vector<SpectrumField> three(3, SpectrumField(Truncation{4, 4}));
    EXPECT_EQ(momentum_balance_residual(three, 1e-3), 0.0);
}

TEST(Momentum, PureDecayLinearRun) {
    // the centered difference error is dt^2 / 6 |P'''| with
    // |P'''| <= 8 pi sum_odd k2^4 |omega_{0,k2}|
    const Truncation tr{4, 32};
    SpectrumField w(tr);
    w(0, 1) = 0.1;
    w(0, 2) = 0.05;
    auto worst = [&](double dt) {
        EvolutionConfig cfg;
        cfg.dt = dt;
        cfg.T = 0.05;
        cfg.linear_only = true;
        const auto traj = run(w, cfg);
        double m = 0.0;
        for (std::size_t i = 1; i + 1 < traj.fields.size(); ++i) {
            std::span<const SpectrumField> win(&traj.fields[i - 1], 3);
            m = std::max(m, momentum_balance_residual(win, dt));
        }
        return m;
    };
    const double a = worst(1e-3);
    EXPECT_LT(a, 1e-6);
    EXPECT_NEAR(a, 1e-6 / 6 * 8 * std::numbers::pi * 0.1, 2e-8);
    EXPECT_NEAR(worst(2e-3) / a, 4.0, 0.05);
}

TEST(Momentum, SeriesMatchesWindowForm) {
    const auto w = envelope_data(Truncation{6, 16}, 0.1, 6);
    EvolutionConfig cfg;
    cfg.dt = 1e-2;
    cfg.T = 0.03;
    const auto t = run(w, cfg);
    std::vector<double> p, b;
    for (const auto& f : t.fields) {
        const auto r = record(f);
        p.push_back(r.momentum_x1);
        b.push_back(r.boundary_trace);
    }
    const auto s = momentum_balance_series(p, b, cfg.dt);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(s[0], momentum_balance_residual(std::span(t.fields).subspan(0, 3), cfg.dt), 1e-14);
}

TEST(DecayFit, ExactModel) {
    const Truncation tr{9, 24};
    SpectrumField w(tr, 0.5);
    for (int k1 = -9; k1 <= 9; ++k1)
        for (int k2 = 0; k2 <= 24; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            const double a = std::exp(-(1.0 + std::abs(k1)) * 0.5) / (k1 * k1 + k2 * k2);
            w(k1, k2) = std::polar(a, 0.3 * k1 + 0.1 * k2);
        }
    const auto f = decay_fit(w);
    EXPECT_NEAR(f.nu, 1.0, 1e-6);
    EXPECT_NEAR(f.power, 2.0, 1e-6);
    EXPECT_NEAR(f.D, 1.0, 1e-6);
    EXPECT_LT(f.rms_residual, 1e-10);
    EXPECT_GT(f.modes, 100);
}

TEST(DecayFit, HeatDecayedEnvelope) {
    // pure heat decay of envelope data: the rate in k1 is positive and the power
    // steeper than the initial alpha
    auto w = envelope_data(Truncation{12, 48}, 0.1, 3);
    const double t = 0.5;
    for (int k1 = -12; k1 <= 12; ++k1)
        for (int k2 = 0; k2 <= 48; ++k2) w(k1, k2) *= std::exp(-(k1 * k1 + k2 * k2) * t);
    w.time = t;
    const auto f = decay_fit(w, 4, 6, 1e-30);
    EXPECT_GT(f.nu, 0.0);
    EXPECT_GT(f.power, 1.5);
    EXPECT_TRUE(std::isfinite(f.D_envelope));
}

TEST(DecayFit, Errors) {
    SpectrumField w(Truncation{4, 4}, 0.0);
    w(1, 1) = 1.0;
    EXPECT_THROW(decay_fit(w), InvalidInput);
    w.time = 0.5;
    EXPECT_THROW(decay_fit(w), InvalidInput);  // one mode above the floor
}

TEST(K2Profile, PowerLawAndExponential) {
    SpectrumField p(Truncation{2, 40}, 0.5), e(Truncation{2, 40}, 0.5);
    for (int k2 = 0; k2 <= 40; ++k2) {
        p(1, k2) = 1.0 / (1.0 + k2 * k2);
        e(1, k2) = std::exp(-0.3 * k2);
    }
    const auto a = k2_profile(p, 1, 2, 30);
    EXPECT_NEAR(a.power, 2.0, 1e-10);
    EXPECT_LT(a.power_rms, 1e-12);
    EXPECT_GT(a.exp_rms, 1e-2);
    const auto b = k2_profile(e, 1, 2, 30);
    EXPECT_NEAR(b.exp_rate, 0.3, 1e-10);
    EXPECT_LT(b.exp_rms, 1e-12);
    EXPECT_GT(b.power_rms, 1e-2);
}

TEST(WeightedNorm, Examples) {
    SpectrumField w(Truncation{4, 4});
    w(1, 1) = 1.0;
    EXPECT_NEAR(weighted_norm(w, 1.5, 0.0, 0.0), std::pow(2.0, 0.75) * 2, 1e-14);
    EXPECT_NEAR(weighted_norm(w, 1.5, 0.0, 0.4), std::pow(2.0, 0.75) * 2 * std::exp(0.2), 1e-14);
    EXPECT_NEAR(weighted_norm(w, 1.5, 0.0, std::nullopt), std::pow(2.0, 0.75), 1e-14);
    EXPECT_EQ(weighted_norm(SpectrumField(Truncation{4, 4}), 1.5, 0.0, 0.0), 0.0);
    EXPECT_THROW(weighted_norm(w, -1.0, 0.0, 0.0), InvalidInput);
}

TEST(WeightedNorm, EnvelopeData) {
    for (double beta : {0.0, 1.0}) {
        RunConfig rc;
        rc.truncation = {10, 30};
        rc.D0 = 0.2;
        rc.beta = beta;
        const auto w = generate_initial_data(rc);
        EXPECT_LE(weighted_norm(w, rc.alpha, rc.beta, 0.0), rc.D0 * (1 + 1e-12));
    }
}

TEST(EnergyIdentity, ResidualFormula) {
    EXPECT_DOUBLE_EQ(energy_identity_residual(1.0, 0.9, 0.06, 0.04, 0.1), -1.0 + 0.1);
    // exact decay of a k^2 = 1 mode: U = E = e^{-2t}; residual is O(dt^2)
    auto res = [](double dt) {
        return energy_identity_residual(1.0, std::exp(-2 * dt), 1.0, std::exp(-2 * dt), dt);
    };
    EXPECT_NEAR(res(1e-2) / res(5e-3), 4.0, 0.05);
}

TEST(Csv, HeaderAndRow) {
    std::ostringstream os;
    write_csv_header(os);
    DiagnosticsRecord r;
    r.t = 0.25;
    r.U = 1.0;
    write_csv_row(os, 3, r, 1e-9, std::nan(""), 2);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
    EXPECT_EQ(count(header), static_cast<long>(csv_columns().size()));
    EXPECT_EQ(count(row), static_cast<long>(csv_columns().size()));
    EXPECT_EQ(header.substr(0, 7), "step,t,");
    EXPECT_NE(row.find(",,"), std::string::npos);  // empty momentum cell
    EXPECT_EQ(row.substr(0, 2), "3,");
}
