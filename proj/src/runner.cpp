#include "flatcyl/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "flatcyl/diagnostics.hpp"
#include "text_io.hpp"

namespace flatcyl {

namespace fs = std::filesystem;

namespace {

class RestartError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string step_name(long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06ld", step);
    return buf;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(p, mode);
    if (!os) throw IoError("cannot open " + p.string() + " for writing");
    return os;
}

void report(std::ostream& err, const char* category, long step, const std::string& msg) {
    std::string m = msg;
    for (auto& c : m)
        if (c == '"' || c == '\n') c = '\'';
    err << "error category=" << category;
    if (step >= 0) err << " step=" << step;
    err << " message=\"" << m << "\"\n";
}

nlohmann::json fit_json(const SpectrumField& w, long step) {
    nlohmann::json j;
    j["step"] = step;
    j["t"] = w.time;
    try {
        const DecayFit f = decay_fit(w);
        j["D"] = f.D;
        j["nu"] = f.nu;
        j["power"] = f.power;
        j["D_envelope"] = f.D_envelope;
        j["fitted_bound_holds"] = f.fitted_bound_holds;
        j["modes"] = f.modes;
        j["rms_residual"] = f.rms_residual;
    } catch (const InvalidInput& e) {
        j["error"] = e.what();
    }
    const auto& tr = w.truncation();
    try {
        const K2Profile p = k2_profile(w, 1, 2, (2 * tr.k2max) / 3);
        j["k2_profile"] = {{"k1", 1},           {"exp_rate", p.exp_rate}, {"exp_rms", p.exp_rms},
                           {"power", p.power},  {"power_rms", p.power_rms}, {"modes", p.modes}};
    } catch (const InvalidInput& e) {
        j["k2_profile"] = {{"error", e.what()}};
    }
    return j;
}

// Per-step CSV rows. Row n is written once step n + 1 is known (momentum residual
// uses a centered difference); the final row carries an empty momentum field.
class DiagnosticsWriter {
  public:
    DiagnosticsWriter(std::ostream& os, Truncation tr, double dt, long first_step, const SpectrumField& w, int picard)
        : os_(os), conv_(tr), dt_(dt), first_step_(first_step) {
        push(first_step, w, picard);
    }

    void push(long step, const SpectrumField& w, int picard) {
        const HatArray r = conv_(w);
        Entry e{step, record(w, {}, &r), picard, std::numeric_limits<double>::quiet_NaN()};
        if (!hist_.empty()) {
            const auto& p = hist_.back().rec;
            e.energy_residual = energy_identity_residual(p.U, e.rec.U, p.E, e.rec.E, dt_);
        }
        hist_.push_back(e);
        if (hist_.size() > 3) hist_.erase(hist_.begin());
        if (hist_.size() == 3 && hist_[1].step > first_step_) emit(hist_[1], momentum());
        max_constraint_ = std::max(max_constraint_, e.rec.max_constraint_residual);
        max_boundary_u_ = std::max(max_boundary_u_, e.rec.boundary_velocity_max());
    }

    void finish() {
        if (hist_.size() >= 2) emit(hist_.back(), std::numeric_limits<double>::quiet_NaN());
    }

    const DiagnosticsRecord& last() const { return hist_.back().rec; }
    double max_constraint() const { return max_constraint_; }
    double max_boundary_u() const { return max_boundary_u_; }

  private:
    struct Entry {
        long step;
        DiagnosticsRecord rec;
        int picard;
        double energy_residual;
    };

    double momentum() const {
        const double p[3] = {hist_[0].rec.momentum_x1, hist_[1].rec.momentum_x1, hist_[2].rec.momentum_x1};
        const double b[3] = {hist_[0].rec.boundary_trace, hist_[1].rec.boundary_trace, hist_[2].rec.boundary_trace};
        return momentum_balance_series(p, b, dt_)[0];
    }

    void emit(const Entry& e, double momentum_residual) {
        write_csv_row(os_, e.step, e.rec, e.energy_residual, momentum_residual, e.picard);
    }

    std::ostream& os_;
    TransformConvolution conv_;
    double dt_;
    long first_step_;
    std::vector<Entry> hist_;
    double max_constraint_ = 0.0;
    double max_boundary_u_ = 0.0;
};

struct Segment {
    SpectrumField initial;
    std::optional<EvolutionState> state;
    BoundaryFluxHistory fluxes;
};

Segment load_restart(const fs::path& dir, const RunConfig& cfg) {
    try {
        Checkpoint ck = read_checkpoint(dir);
        require_compatible(ck, cfg.evolution());
        if (!(ck.initial.truncation() == cfg.truncation))
            throw InvalidInput("restart manifest mismatch: truncation");
        return {std::move(ck.initial), std::move(ck.state), std::move(ck.fluxes)};
    } catch (const InvalidInput& e) {
        throw RestartError(e.what());
    }
}

void write_manifest(const fs::path& p, const RunConfig& cfg, const std::optional<fs::path>& restart,
                    const std::string& status, long step) {
    auto os = open_out(p);
    write_run_config(os, cfg);
    if (restart) os << "restart_from = " << restart->string() << '\n';
    os << "status = " << status << '\n' << "last_step = " << step << '\n';
}

void execute(const RunConfig& cfg, const std::optional<fs::path>& restart, std::ostream& out) {
    const fs::path dir = cfg.out;
    fs::create_directories(dir / "snapshots");
    const EvolutionConfig ecfg = cfg.evolution();

    Segment seg;
    if (restart) seg = load_restart(*restart, cfg);
    else {
        seg.initial = generate_initial_data(cfg);
        seg.fluxes.k1max = cfg.truncation.k1max;
        seg.fluxes.dt = cfg.dt;
    }

    std::shared_ptr<const KernelSet> kernels;
    if (!cfg.kernel_cache.empty())
        kernels = std::make_shared<const KernelSet>(KernelSet::cached(cfg.kernel_cache, cfg.truncation, cfg.dt, 0));

    Evolver ev = seg.state ? Evolver(seg.initial, *seg.state, ecfg, kernels) : Evolver(seg.initial, ecfg, kernels);
    if (!seg.state) seg.fluxes.samples.push_back(ev.state().flux);
    const long first = ev.state().step;

    write_manifest(dir / "manifest.txt", cfg, restart, "running", first);
    auto csv = open_out(dir / "diagnostics.csv");
    write_csv_header(csv);
    DiagnosticsWriter diag(csv, cfg.truncation, cfg.dt, first, ev.state().omega, ev.state().picard_iterations);

    auto snapshot = [&](long step) {
        write_snapshot(dir / "snapshots" / ("omega_" + step_name(step) + ".txt"), ev.state().omega);
    };
    if (first == 0) snapshot(0);

    std::vector<long> fit_steps;
    for (double t : cfg.decay_fit_times) fit_steps.push_back(std::lround(t / cfg.dt));
    nlohmann::json fits = nlohmann::json::array();

    const long total = ecfg.steps();
    long next_report = first + std::max(1L, (total - first) / 10);
    while (!ev.finished()) {
        const auto& s = ev.advance();
        seg.fluxes.samples.push_back(s.flux);
        diag.push(s.step, s.omega, s.picard_iterations);
        if (std::find(fit_steps.begin(), fit_steps.end(), s.step) != fit_steps.end())
            fits.push_back(fit_json(s.omega, s.step));
        if (ev.finished() || (cfg.snapshot_every > 0 && s.step % cfg.snapshot_every == 0)) snapshot(s.step);
        if (cfg.checkpoint_every > 0 && s.step % cfg.checkpoint_every == 0 && !ev.finished())
            write_checkpoint(dir / "checkpoints" / ("step_" + step_name(s.step)), ev, seg.fluxes);
        if (s.step >= next_report) {
            out << "step " << s.step << "/" << total << " t=" << detail::fmt_double(ev.time())
                << " U=" << detail::fmt_double(diag.last().U) << " picard=" << s.picard_iterations << '\n';
            next_report += std::max(1L, (total - first) / 10);
        }
    }
    diag.finish();
    csv.flush();
    if (!csv) throw IoError("failed writing diagnostics.csv");

    write_flux_history(dir / "flux.txt", seg.fluxes);
    {
        auto js = open_out(dir / "decay_fit.json");
        js << nlohmann::json{{"fits", fits}}.dump(2) << '\n';
    }
    write_manifest(dir / "manifest.txt", cfg, restart, "complete", ev.state().step);
    out << "completed " << ev.state().step - first << " steps; max constraint residual "
        << detail::fmt_double(diag.max_constraint()) << ", max wall velocity " << detail::fmt_double(diag.max_boundary_u())
        << '\n';
}

}  // namespace

RunConfig resolve_config(const RunOptions& opt) {
    RunConfig c = load_run_config(opt.config);
    if (opt.seed) c.seed = *opt.seed;
    if (opt.dt) c.dt = *opt.dt;
    if (opt.T) c.T = *opt.T;
    if (opt.out) c.out = *opt.out;
    return c;
}

void apply_thread_env() {
    if (const char* s = std::getenv("FLATCYL_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
    }
}

int run_main(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = resolve_config(opt);
        cfg.validate();
    } catch (const ConfigError& e) {
        report(err, "config", -1, e.what());
        return static_cast<int>(ExitCode::config);
    }
    if (opt.dry_run) {
        write_run_config(out, cfg);
        return static_cast<int>(ExitCode::ok);
    }
    try {
        execute(cfg, opt.restart, out);
    } catch (const StepError& e) {
        report(err, "numerical", e.step(), e.what());
        return static_cast<int>(ExitCode::numerical);
    } catch (const NumericalFailure& e) {
        report(err, "numerical", -1, e.what());
        return static_cast<int>(ExitCode::numerical);
    } catch (const RestartError& e) {
        report(err, "restart", -1, e.what());
        return static_cast<int>(ExitCode::restart);
    } catch (const IoError& e) {
        report(err, "io", -1, e.what());
        return static_cast<int>(ExitCode::io);
    } catch (const fs::filesystem_error& e) {
        report(err, "io", -1, e.what());
        return static_cast<int>(ExitCode::io);
    } catch (const std::exception& e) {
        report(err, "internal", -1, e.what());
        return static_cast<int>(ExitCode::internal);
    }
    return static_cast<int>(ExitCode::ok);
}

}  // namespace flatcyl
