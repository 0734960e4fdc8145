#include "flatcyl/run_config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "text_io.hpp"

namespace flatcyl {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double envelope(int k1, int k2, double alpha, double beta) {
    const double kabs = std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
    return 1.0 / (std::pow(kabs, alpha) * (1.0 + std::pow(std::abs(k1), beta)));
}

}  // namespace

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (truncation.k1max < 4 || truncation.k2max < 4) fail("k1max and k2max must be >= 4");
    if (!(D0 >= 0.0) || !std::isfinite(D0)) fail("D0 must be finite and >= 0");
    if (!(alpha > 1.0 && alpha < 2.0)) fail("alpha must satisfy 1 < alpha < 2");
    if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
    if (snapshot_every < 0 || checkpoint_every < 0) fail("snapshot_every and checkpoint_every must be >= 0");
    try {
        evolution().validate();
    } catch (const InvalidInput& e) {
        fail(e.what());
    }
    for (double t : decay_fit_times)
        if (!(t > 0.0) || !std::isfinite(t)) fail("decay_fit_times must be positive");
    if (out.empty()) fail("out must not be empty");
}

EvolutionConfig RunConfig::evolution() const {
    EvolutionConfig e;
    e.dt = dt;
    e.T = T;
    e.picard_tol = picard_tol;
    e.picard_max_iters = picard_max_iters;
    e.constraint_tol = constraint_tol;
    e.convolution = convolution;
    e.linear_only = linear_only;
    return e;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    constexpr std::string_view ctx = "config";
    auto num = [&] {
        try {
            return detail::parse_double(value, ctx, key);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    };
    auto integer = [&] {
        try {
            return detail::parse_int<long>(value, ctx, key);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    };
    if (key == "k1max") c.truncation.k1max = static_cast<int>(integer());
    else if (key == "k2max") c.truncation.k2max = static_cast<int>(integer());
    else if (key == "D0") c.D0 = num();
    else if (key == "alpha") c.alpha = num();
    else if (key == "beta") c.beta = num();
    else if (key == "dt") c.dt = num();
    else if (key == "T") c.T = num();
    else if (key == "picard_tol") c.picard_tol = num();
    else if (key == "picard_max_iters") c.picard_max_iters = static_cast<int>(integer());
    else if (key == "constraint_tol") c.constraint_tol = num();
    else if (key == "seed") {
        try {
            c.seed = detail::parse_int<std::uint64_t>(value, ctx, key);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "out") c.out = value;
    else if (key == "snapshot_every") c.snapshot_every = integer();
    else if (key == "checkpoint_every") c.checkpoint_every = integer();
    else if (key == "kernel_cache") c.kernel_cache = value;
    else if (key == "linear_only") {
        if (value != "0" && value != "1") throw ConfigError("config: linear_only must be 0 or 1");
        c.linear_only = value == "1";
    } else if (key == "convolution") {
        if (value == "transform") c.convolution = ConvolutionPath::transform;
        else if (value == "direct") c.convolution = ConvolutionPath::direct;
        else throw ConfigError("config: convolution must be 'transform' or 'direct'");
    } else if (key == "decay_fit_times") {
        c.decay_fit_times.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                c.decay_fit_times.push_back(detail::parse_double(item, ctx, key));
            } catch (const InvalidInput& e) {
                throw ConfigError(e.what());
            }
        }
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_run_config(std::istream& is, const std::string& source) {
    RunConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        try {
            set_config_value(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw ConfigError("cannot open config " + p.string());
    return parse_run_config(is, p.string());
}

void write_run_config(std::ostream& os, const RunConfig& c) {
    using detail::fmt_double;
    os << "k1max = " << c.truncation.k1max << '\n'
       << "k2max = " << c.truncation.k2max << '\n'
       << "D0 = " << fmt_double(c.D0) << '\n'
       << "alpha = " << fmt_double(c.alpha) << '\n'
       << "beta = " << fmt_double(c.beta) << '\n'
       << "dt = " << fmt_double(c.dt) << '\n'
       << "T = " << fmt_double(c.T) << '\n'
       << "picard_tol = " << fmt_double(c.picard_tol) << '\n'
       << "picard_max_iters = " << c.picard_max_iters << '\n'
       << "constraint_tol = " << fmt_double(c.constraint_tol) << '\n'
       << "convolution = " << (c.convolution == ConvolutionPath::direct ? "direct" : "transform") << '\n'
       << "linear_only = " << (c.linear_only ? 1 : 0) << '\n'
       << "seed = " << c.seed << '\n'
       << "out = " << c.out.string() << '\n'
       << "snapshot_every = " << c.snapshot_every << '\n'
       << "checkpoint_every = " << c.checkpoint_every << '\n'
       << "decay_fit_times = ";
    for (std::size_t i = 0; i < c.decay_fit_times.size(); ++i) os << (i ? "," : "") << fmt_double(c.decay_fit_times[i]);
    os << '\n';
    if (!c.kernel_cache.empty()) os << "kernel_cache = " << c.kernel_cache.string() << '\n';
}

SpectrumField generate_initial_data(const RunConfig& c) {
    c.validate();
    const auto& tr = c.truncation;
    SpectrumField f(tr, 0.0);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> amp(0.5, 1.0), phase(-pi, pi);
    for (int k1 = 0; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const double a = amp(rng) * c.D0 * envelope(k1, k2, c.alpha, c.beta);
            const double ph = phase(rng);
            if (k1 == 0 && k2 == 0) continue;
            if (k1 == 0) {
                f(0, k2) = ph < 0.0 ? -a : a;
            } else {
                f(k1, k2) = std::polar(a, ph);
                f(-k1, k2) = std::conj(f(k1, k2));
            }
        }
    f = project_well_prepared(f);
    // The projection rewrites k2 = 0, 1 and may leave the envelope; scale whole columns back.
    for (int k1 = 1; k1 <= tr.k1max; ++k1) {
        double worst = 0.0;
        for (int k2 = 0; k2 <= tr.k2max; ++k2)
            worst = std::max(worst, std::abs(f(k1, k2)) / envelope(k1, k2, c.alpha, c.beta));
        if (worst <= c.D0) continue;
        const double s = c.D0 / worst;
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            f(k1, k2) *= s;
            f(-k1, k2) = std::conj(f(k1, k2));
        }
    }
    return f;
}

}  // namespace flatcyl
