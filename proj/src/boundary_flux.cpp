#include "flatcyl/boundary_flux.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "text_io.hpp"

namespace flatcyl {

namespace {

constexpr double theta_cut = 1e-17;

void require_k1(int k1, const char* what) {
    if (k1 == 0) throw InvalidInput(std::string(what) + ": k1 must be nonzero");
}

double sign_of(Parity p) { return p == Parity::even ? 1.0 : -1.0; }

}  // namespace

double d_pm(int k1, Parity p) {
    require_k1(k1, "d_pm");
    const double k = std::abs(k1);
    const double t = std::tanh(0.5 * pi * k);
    return p == Parity::even ? k * t : k / t;
}

cplx laplace_sum(int k1, cplx lambda, Parity p) {
    require_k1(k1, "laplace_sum");
    const double kk = static_cast<double>(k1) * k1;
    if (lambda.imag() == 0.0 && lambda.real() <= -kk)
        throw InvalidInput("laplace_sum: lambda on the singular half-line Re <= -k1^2");
    const cplx z = std::sqrt(kk + lambda);
    const cplx th = std::tanh(0.5 * pi * z);
    const cplx phi = p == Parity::even ? 1.0 / th : th;
    return 0.5 * pi * phi / z;
}

double theta_series(double tau, Parity p) {
    if (!(tau > 0.0)) throw InvalidInput("theta_series: tau must be positive");
    double s = p == Parity::even ? 1.0 : 0.0;
    for (int k2 = p == Parity::even ? 2 : 1;; k2 += 2) {
        const double term = 2.0 * std::exp(-static_cast<double>(k2) * k2 * tau);
        s += term;
        if (term < theta_cut * std::max(s, 1e-300)) break;
    }
    return s;
}

double theta_images(double tau, Parity p) {
    if (!(tau > 0.0)) throw InvalidInput("theta_images: tau must be positive");
    // Poisson summation: sum_{j in Z} (+/-1)^j e^{-j^2 pi^2 / (4 tau)} times sqrt(pi)/(2 sqrt(tau))
    const double sg = sign_of(p);
    double s = 1.0, sj = 1.0;
    for (int j = 1;; ++j) {
        sj *= sg;
        const double e = std::exp(-static_cast<double>(j) * j * pi * pi / (4.0 * tau));
        s += 2.0 * sj * e;
        if (e < theta_cut) break;
    }
    return 0.5 * std::sqrt(pi / tau) * s;
}

double singular_kernel(int k1, double tau, Parity p) {
    if (!(tau > 0.0)) throw InvalidInput("singular_kernel: tau must be positive");
    const double th = tau < 1.0 ? theta_images(tau, p) : theta_series(tau, p);
    return std::exp(-static_cast<double>(k1) * k1 * tau) * th;
}

double singular_kernel_truncated(int k1, int k2max, double tau, Parity p) {
    if (!(tau > 0.0)) throw InvalidInput("singular_kernel: tau must be positive");
    double s = 0.0;
    for (int k2 = p == Parity::even ? 0 : 1; k2 <= k2max; k2 += 2)
        s += neumann_weight(k2) * std::exp(-static_cast<double>(k1 * k1 + k2 * k2) * tau);
    return s;
}

double parity_sum_inverse_square(int k1, int k2max, Parity p) {
    require_k1(k1, "parity_sum_inverse_square");
    double s = 0.0;
    for (int k2 = p == Parity::even ? 0 : 1; k2 <= k2max; k2 += 2)
        s += neumann_weight(k2) / static_cast<double>(k1 * k1 + k2 * k2);
    return s;
}

LagWeights quadrature_lag_weights(const std::function<double(double)>& kernel, double dt, int n_lags) {
    using GL = boost::math::quadrature::gauss<double, 30>;
    LagWeights w{dt, std::vector<double>(n_lags), std::vector<double>(n_lags)};
    if (n_lags == 0) return w;
    w.near[0] = GL::integrate([&](double v) { return kernel(dt * v * v) * (1.0 - v * v) * 2.0 * dt * v; }, 0.0, 1.0);
    w.far[0] = GL::integrate([&](double v) { return kernel(dt * v * v) * v * v * 2.0 * dt * v; }, 0.0, 1.0);
    for (int m = 1; m < n_lags; ++m) {
        // u = (tau - m dt) / dt in [0, 1]
        w.near[m] = GL::integrate([&](double u) { return kernel((m + u) * dt) * (1.0 - u) * dt; }, 0.0, 1.0);
        w.far[m] = GL::integrate([&](double u) { return kernel((m + u) * dt) * u * dt; }, 0.0, 1.0);
    }
    return w;
}

VolterraKernel make_truncated_kernel(int k1, int k2max, Parity p, double dt, int n_lags) {
    require_k1(k1, "make_truncated_kernel");
    if (k2max < 0) throw InvalidInput("make_truncated_kernel: k2max must be >= 0");
    if (!(dt > 0.0)) throw InvalidInput("make_truncated_kernel: dt must be positive");
    VolterraKernel k;
    k.k1 = std::abs(k1);
    k.parity = p;
    k.k2max = k2max;
    k.d = d_pm(k1, p);
    k.s0 = parity_sum_inverse_square(k1, k2max, p);
    if (k.s0 < flux_step_floor)
        throw InvalidInput("make_truncated_kernel: parity sum S0 vanishes; K2 too small for this parity");
    k.lag = {dt, std::vector<double>(n_lags), std::vector<double>(n_lags)};
    for (int k2 = p == Parity::even ? 0 : 1; k2 <= k2max; k2 += 2) {
        const double kk = static_cast<double>(k1 * k1 + k2 * k2);
        const double x = kk * dt;
        const double w = neumann_weight(k2);
        const double e1 = phi1(x), e2 = phi2(x);
        for (int m = 0; m < n_lags; ++m) {
            const double decay = std::exp(-m * x);
            k.lag.near[m] += w * decay * dt * (e1 - e2);
            k.lag.far[m] += w * decay * dt * e2;
        }
    }
    return k;
}

VolterraKernel make_infinite_kernel(int k1, Parity p, double dt, int n_lags) {
    require_k1(k1, "make_infinite_kernel");
    if (!(dt > 0.0)) throw InvalidInput("make_infinite_kernel: dt must be positive");
    VolterraKernel k;
    k.k1 = std::abs(k1);
    k.parity = p;
    k.k2max = -1;
    k.d = d_pm(k1, p);
    k.s0 = 0.5 * pi / k.d;
    k.lag = quadrature_lag_weights([&](double tau) { return singular_kernel(k1, tau, p); }, dt, n_lags);
    return k;
}

cplx initial_flux(const VolterraKernel& k, cplx gprime0) { return gprime0 / k.s0; }

cplx solve_flux_step(const VolterraKernel& k, std::span<const cplx> history, cplx gprime_next) {
    if (history.empty()) throw InvalidInput("solve_flux_step: empty history");
    const std::size_t n = history.size() - 1;
    if (n + 1 > static_cast<std::size_t>(k.n_lags()))
        throw InvalidInput("solve_flux_step: kernel tabulated for " + std::to_string(k.n_lags()) +
                           " lags, step needs " + std::to_string(n + 1));
    const auto& near = k.lag.near;
    const auto& far = k.lag.far;
    const double den = k.s0 - near[0];
    if (!(den > flux_step_floor)) throw NumericalFailure("solve_flux_step: S0 - near[0] below floor");
    cplx s = gprime_next + far[0] * history[n];
    for (std::size_t m = 1; m <= n; ++m) s += near[m] * history[n + 1 - m] + far[m] * history[n - m];
    return s / den;
}

std::vector<cplx> solve_flux(const VolterraKernel& k, std::span<const cplx> gprime) {
    std::vector<cplx> a;
    if (gprime.empty()) return a;
    a.reserve(gprime.size());
    a.push_back(initial_flux(k, gprime[0]));
    for (std::size_t n = 1; n < gprime.size(); ++n) a.push_back(solve_flux_step(k, a, gprime[n]));
    return a;
}

std::vector<double> solve_flux(const VolterraKernel& k, std::span<const double> gprime) {
    std::vector<cplx> c(gprime.begin(), gprime.end());
    auto a = solve_flux(k, std::span<const cplx>(c));
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i].real();
    return r;
}

double FluxArray::max_abs() const {
    double m = 0.0;
    for (const auto& v : v_) m = std::max(m, std::abs(v));
    return m;
}

void enforce_flux_symmetry(FluxArray& f) {
    for (Parity p : {Parity::even, Parity::odd}) {
        f(0, p) = 0.0;
        for (int k1 = 1; k1 <= f.k1max(); ++k1) f(-k1, p) = std::conj(f(k1, p));
    }
}

cplx BoundaryFluxHistory::wall_flux_bottom(std::size_t n, int k1) const {
    return 0.5 * (samples.at(n)(k1, Parity::even) + samples.at(n)(k1, Parity::odd));
}

cplx BoundaryFluxHistory::wall_flux_top(std::size_t n, int k1) const {
    return 0.5 * (samples.at(n)(k1, Parity::even) - samples.at(n)(k1, Parity::odd));
}

void write_flux_history(const std::filesystem::path& p, const BoundaryFluxHistory& h) {
    using detail::fmt_double;
    std::ofstream os(p);
    if (!os) throw InvalidInput("cannot open " + p.string() + " for writing");
    const std::size_t steps = h.samples.empty() ? 0 : h.samples.size() - 1;
    os << "k1max=" << h.k1max << " dt=" << fmt_double(h.dt) << " n=" << steps << '\n';
    for (std::size_t n = 0; n < h.samples.size(); ++n) {
        const std::string t = fmt_double(static_cast<double>(n) * h.dt);
        for (int k1 = -h.k1max; k1 <= h.k1max; ++k1)
            for (Parity par : {Parity::even, Parity::odd}) {
                const cplx v = h.samples[n](k1, par);
                os << k1 << ' ' << parity_name(par) << ' ' << t << ' ' << fmt_double(v.real()) << ' '
                   << fmt_double(v.imag()) << '\n';
            }
    }
}

BoundaryFluxHistory read_flux_history(const std::filesystem::path& p) {
    constexpr std::string_view ctx = "flux history";
    std::ifstream is(p);
    if (!is) throw InvalidInput("cannot open " + p.string());
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("flux history: empty file");
    std::istringstream hs(line);
    std::string a, b, c;
    if (!(hs >> a >> b >> c)) throw InvalidInput("flux history: malformed header");
    BoundaryFluxHistory h;
    h.k1max = detail::parse_int(detail::value_after(a, "k1max=", ctx), ctx, "k1max");
    h.dt = detail::parse_double(detail::value_after(b, "dt=", ctx), ctx, "dt");
    const auto steps = detail::parse_int<long>(detail::value_after(c, "n=", ctx), ctx, "n");
    if (h.k1max < 0 || steps < 0 || !(h.dt > 0.0)) throw InvalidInput("flux history: invalid header values");
    std::string s1, s2, st, sr, si;
    for (long n = 0; n <= steps; ++n) {
        FluxArray f(h.k1max);
        for (int k1 = -h.k1max; k1 <= h.k1max; ++k1)
            for (Parity par : {Parity::even, Parity::odd}) {
                if (!(is >> s1 >> s2 >> st >> sr >> si)) throw InvalidInput("flux history: truncated sample list");
                if (detail::parse_int(s1, ctx, "k1") != k1 || s2 != parity_name(par))
                    throw InvalidInput("flux history: entries out of order at k1=" + s1);
                if (detail::parse_double(st, ctx, "t") != static_cast<double>(n) * h.dt)
                    throw InvalidInput("flux history: time " + st + " off the grid");
                f(k1, par) = {detail::parse_double(sr, ctx, "re"), detail::parse_double(si, ctx, "im")};
            }
        h.samples.push_back(std::move(f));
    }
    if (is >> s1) throw InvalidInput("flux history: trailing data");
    return h;
}

VolterraRHS volterra_rhs(const ModeArray& omega0, const ModeArray& psi, const ModeArray& nonlinear, double t) {
    const auto& tr = omega0.truncation();
    if (!(psi.truncation() == tr) || !(nonlinear.truncation() == tr))
        throw InvalidInput("volterra_rhs: truncation mismatch");
    VolterraRHS r{t, FluxArray(tr.k1max), FluxArray(tr.k1max)};
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        if (k1 == 0) continue;
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const double kk = static_cast<double>(k1 * k1 + k2 * k2);
            const double w = neumann_weight(k2);
            const double heat = std::exp(-kk * t);
            const Parity par = parity_of(k2);
            r.g(k1, par) += (w / kk) * (-heat * omega0(k1, k2) + psi(k1, k2));
            r.gprime(k1, par) += w * (heat * omega0(k1, k2) + nonlinear(k1, k2) / kk - psi(k1, k2));
        }
    }
    return r;
}

KernelSet::KernelSet(Truncation tr, double dt, int n_lags) : tr_(tr), dt_(dt), n_lags_(n_lags), weights_(tr, dt) {
    if (tr.k1max < 1) throw InvalidInput("KernelSet: K1 must be >= 1");
    if (n_lags < 0) throw InvalidInput("KernelSet: negative lag count");
    k_.resize(static_cast<std::size_t>(2 * tr.k1max));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < 2 * tr.k1max; ++i)
        k_[i] = make_truncated_kernel(i / 2 + 1, tr.k2max, i % 2 == 0 ? Parity::even : Parity::odd, dt, n_lags);
}

const VolterraKernel& KernelSet::kernel(int k1, Parity p) const {
    require_k1(k1, "KernelSet::kernel");
    const int a = std::abs(k1);
    if (a > tr_.k1max) throw InvalidInput("KernelSet::kernel: k1 outside truncation");
    return k_[static_cast<std::size_t>(2 * (a - 1) + parity_slot(p))];
}

namespace {

constexpr char cache_magic[8] = {'F', 'C', 'K', 'S', 'E', 'T', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

void KernelSet::save(const std::filesystem::path& p) const {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw InvalidInput("cannot open " + p.string() + " for writing");
    os.write(cache_magic, sizeof(cache_magic));
    put(os, tr_.k1max);
    put(os, tr_.k2max);
    put(os, dt_);
    put(os, n_lags_);
    for (const auto& k : k_) {
        put(os, k.k1);
        put(os, static_cast<int>(parity_slot(k.parity)));
        put(os, k.d);
        put(os, k.s0);
        os.write(reinterpret_cast<const char*>(k.lag.near.data()), sizeof(double) * k.lag.near.size());
        os.write(reinterpret_cast<const char*>(k.lag.far.data()), sizeof(double) * k.lag.far.size());
    }
    if (!os) throw InvalidInput("failed writing kernel cache " + p.string());
}

std::optional<KernelSet> KernelSet::load(const std::filesystem::path& p, Truncation tr, double dt, int n_lags) {
    std::ifstream is(p, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[sizeof(cache_magic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, cache_magic, sizeof(magic)) != 0) return std::nullopt;
    Truncation ftr;
    double fdt = 0.0;
    int flags = 0;
    if (!get(is, ftr.k1max) || !get(is, ftr.k2max) || !get(is, fdt) || !get(is, flags)) return std::nullopt;
    // Key must match bit for bit.
    if (!(ftr == tr) || std::memcmp(&fdt, &dt, sizeof(double)) != 0 || flags != n_lags) return std::nullopt;
    KernelSet ks;
    ks.tr_ = tr;
    ks.dt_ = dt;
    ks.n_lags_ = n_lags;
    ks.weights_ = ModeWeights(tr, dt);
    ks.k_.resize(static_cast<std::size_t>(2 * tr.k1max));
    for (std::size_t i = 0; i < ks.k_.size(); ++i) {
        auto& k = ks.k_[i];
        int slot = 0;
        if (!get(is, k.k1) || !get(is, slot) || !get(is, k.d) || !get(is, k.s0)) return std::nullopt;
        if (k.k1 != static_cast<int>(i / 2) + 1 || slot != static_cast<int>(i % 2)) return std::nullopt;
        k.parity = slot == 0 ? Parity::even : Parity::odd;
        k.k2max = tr.k2max;
        k.lag = {dt, std::vector<double>(n_lags), std::vector<double>(n_lags)};
        if (!is.read(reinterpret_cast<char*>(k.lag.near.data()), sizeof(double) * n_lags)) return std::nullopt;
        if (!is.read(reinterpret_cast<char*>(k.lag.far.data()), sizeof(double) * n_lags)) return std::nullopt;
    }
    char extra;
    if (is.read(&extra, 1)) return std::nullopt;
    return ks;
}

KernelSet KernelSet::cached(const std::filesystem::path& p, Truncation tr, double dt, int n_lags) {
    if (auto ks = load(p, tr, dt, n_lags)) return std::move(*ks);
    KernelSet ks(tr, dt, n_lags);
    ks.save(p);
    return ks;
}

bool operator==(const KernelSet& a, const KernelSet& b) {
    if (!(a.tr_ == b.tr_) || a.dt_ != b.dt_ || a.n_lags_ != b.n_lags_ || a.k_.size() != b.k_.size()) return false;
    for (std::size_t i = 0; i < a.k_.size(); ++i) {
        const auto &x = a.k_[i], &y = b.k_[i];
        if (x.k1 != y.k1 || x.parity != y.parity || x.d != y.d || x.s0 != y.s0 || x.lag.near != y.lag.near ||
            x.lag.far != y.lag.far)
            return false;
    }
    return true;
}

FluxArray solve_consistent_flux(const KernelSet& ks, const FluxArray& g_next, const ModeArray& phi,
                                const FluxArray& f_prev) {
    const auto& tr = ks.truncation();
    if (!(phi.truncation() == tr)) throw InvalidInput("solve_consistent_flux: truncation mismatch");
    const auto& mw = ks.mode_weights();
    FluxArray f(tr.k1max);
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        if (k1 == 0) continue;
        cplx known[2] = {};
        double den[2] = {};
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const int s = parity_slot(parity_of(k2));
            const double c = neumann_weight(k2) / static_cast<double>(k1 * k1 + k2 * k2);
            const auto& e = mw(k1, k2);
            known[s] += c * (e.decay * phi(k1, k2) + e.w0 * f_prev(k1, parity_of(k2)));
            den[s] += c * e.w1;
        }
        for (Parity par : {Parity::even, Parity::odd}) {
            const int s = parity_slot(par);
            if (!(den[s] > 0.0)) throw InvalidInput("solve_consistent_flux: empty parity class; K2 too small");
            f(k1, par) = (g_next(k1, par) - known[s]) / den[s];
        }
    }
    return f;
}

ModeArray flux_to_modes(const FluxArray& f, Truncation tr) {
    if (f.k1max() != tr.k1max) throw InvalidInput("flux_to_modes: truncation mismatch");
    ModeArray m(tr);
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) m(k1, k2) = f(k1, parity_of(k2));
    return m;
}

void require_consistent_initial_rhs(const ModeArray& omega0) {
    const auto& tr = omega0.truncation();
    ModeArray zero(tr);
    const VolterraRHS r = volterra_rhs(omega0, zero, zero, 0.0);
    const double tol = initial_rhs_tol * std::max(1.0, omega0.max_abs());
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1) {
        if (k1 == 0) continue;
        for (Parity par : {Parity::even, Parity::odd})
            if (std::abs(r.g(k1, par)) > tol)
                throw InvalidInput("initial data are not well prepared: g(0) = " +
                                   std::to_string(std::abs(r.g(k1, par))) + " at k1=" + std::to_string(k1) +
                                   " parity " + parity_name(par));
    }
}

}  // namespace flatcyl
