#include "flatcyl/evolution.hpp"

#include <cmath>

namespace flatcyl {

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("dt must be positive and finite");
    if (!(T >= dt) || !std::isfinite(T)) throw InvalidInput("T must be finite and at least dt");
    if (!(picard_tol > 0.0)) throw InvalidInput("picard_tol must be positive");
    if (!(constraint_tol > 0.0)) throw InvalidInput("constraint_tol must be positive");
    if (picard_max_iters < 1) throw InvalidInput("picard_max_iters must be >= 1");
    const double r = T / dt;
    if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
        throw InvalidInput("T must be an integer multiple of dt");
}

long EvolutionConfig::steps() const { return std::lround(T / dt); }

namespace {

const char* kind_name(StepError::Kind k) {
    switch (k) {
        case StepError::Kind::non_finite: return "non-finite values";
        case StepError::Kind::picard_divergence: return "Picard iteration did not converge";
        case StepError::Kind::constraint_violation: return "constraint violated";
    }
    return "";
}

bool all_finite(const ModeArray& a) {
    for (const auto& v : a.data())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double sup_distance(const ModeArray& a, const ModeArray& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

std::shared_ptr<const KernelSet> ensure_kernels(std::shared_ptr<const KernelSet> ks, Truncation tr, double dt) {
    if (!ks) return std::make_shared<const KernelSet>(tr, dt, 0);
    if (!(ks->truncation() == tr) || ks->dt() != dt) throw InvalidInput("kernel set does not match run parameters");
    return ks;
}

}  // namespace

StepError::StepError(Kind kind, long step, const std::string& what)
    : NumericalFailure("step " + std::to_string(step) + ": " + kind_name(kind) + ": " + what),
      kind_(kind),
      step_(step) {}

SpectrumField duhamel_step(const SpectrumField& omega, const FluxArray& f_prev, const ModeArray& n_prev,
                           const FluxArray& f_next, const ModeArray& n_next, const ModeWeights& w) {
    const auto& tr = omega.truncation();
    SpectrumField out(tr, omega.time + w.dt());
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const Parity par = parity_of(k2);
            const auto& e = w(k1, k2);
            out(k1, k2) = e.decay * omega(k1, k2) + e.w0 * (f_prev(k1, par) - n_prev(k1, k2)) +
                          e.w1 * (f_next(k1, par) - n_next(k1, k2));
        }
    return out;
}

Evolver::Evolver(const SpectrumField& initial, const EvolutionConfig& cfg, std::shared_ptr<const KernelSet> kernels)
    : cfg_(cfg), omega0_(initial), evaluator_(initial.truncation(), cfg.convolution) {
    cfg_.validate();
    const auto& tr = initial.truncation();
    if (tr.k1max < 1 || tr.k2max < 1) throw InvalidInput("truncation must have K1, K2 >= 1");
    require_well_formed(initial, "initial data");
    const double c = max_constraint_residual(initial);
    if (c > cfg_.constraint_tol)
        throw InvalidInput("initial data are not well prepared: constraint residual " + std::to_string(c));
    require_consistent_initial_rhs(initial);
    kernels_ = ensure_kernels(std::move(kernels), tr, cfg_.dt);
    omega0_.time = 0.0;

    state_.step = 0;
    state_.omega = omega0_;
    state_.nonlinear = nonlinear(omega0_);
    state_.psi = ModeArray(tr);
    state_.phi = ModeArray(tr);
    const VolterraRHS rhs = volterra_rhs(omega0_, state_.psi, state_.nonlinear, 0.0);
    state_.flux = FluxArray(tr.k1max);
    for (int k1 = 1; k1 <= tr.k1max; ++k1)
        for (Parity p : {Parity::even, Parity::odd})
            state_.flux(k1, p) = initial_flux(kernels_->kernel(k1, p), rhs.gprime(k1, p));
    enforce_flux_symmetry(state_.flux);
}

Evolver::Evolver(const SpectrumField& initial, EvolutionState state, const EvolutionConfig& cfg,
                 std::shared_ptr<const KernelSet> kernels)
    : cfg_(cfg), omega0_(initial), evaluator_(initial.truncation(), cfg.convolution), state_(std::move(state)) {
    cfg_.validate();
    const auto& tr = initial.truncation();
    if (!(state_.omega.truncation() == tr) || !(state_.nonlinear.truncation() == tr) ||
        !(state_.psi.truncation() == tr) || !(state_.phi.truncation() == tr) || state_.flux.k1max() != tr.k1max)
        throw InvalidInput("restart state does not match the initial truncation");
    require_well_formed(initial, "initial data");
    kernels_ = ensure_kernels(std::move(kernels), tr, cfg_.dt);
    omega0_.time = 0.0;
}

NonlinearTerm Evolver::nonlinear(const SpectrumField& w) {
    if (cfg_.linear_only) return NonlinearTerm(w.truncation());
    NonlinearTerm n = evaluator_(w);
    enforce_reality(n);
    return n;
}

const EvolutionState& Evolver::advance() {
    const long next = state_.step + 1;
    const double t_next = static_cast<double>(next) * cfg_.dt;
    const auto& tr = omega0_.truncation();
    const auto& mw = kernels_->mode_weights();
    const EvolutionState& s = state_;

    SpectrumField iterate(tr, t_next);
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) iterate(k1, k2) = mw(k1, k2).decay * s.omega(k1, k2);

    deltas_.clear();
    NonlinearTerm n_next;
    ModeArray psi_next;
    FluxArray f_next;
    bool converged = false;
    int it = 0;
    while (it < cfg_.picard_max_iters) {
        ++it;
        n_next = nonlinear(iterate);
        psi_next = s.psi;
        advance_exponential_integral(psi_next, s.nonlinear, n_next, mw);
        const VolterraRHS rhs = volterra_rhs(omega0_, psi_next, n_next, t_next);
        f_next = solve_consistent_flux(*kernels_, rhs.g, s.phi, s.flux);
        enforce_flux_symmetry(f_next);
        SpectrumField updated = duhamel_step(s.omega, s.flux, s.nonlinear, f_next, n_next, mw);
        updated.time = t_next;
        if (!all_finite(updated)) throw StepError(StepError::Kind::non_finite, next, "field update");
        const double delta = sup_distance(updated, iterate);
        deltas_.push_back(delta);
        iterate = std::move(updated);
        if (delta < cfg_.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw StepError(StepError::Kind::picard_divergence, next,
                        "last iterate distance " + std::to_string(deltas_.back()) + " after " +
                            std::to_string(it) + " iterations; try halving dt");
    const double c = max_constraint_residual(iterate);
    if (!(c < cfg_.constraint_tol))
        throw StepError(StepError::Kind::constraint_violation, next, "residual " + std::to_string(c));

    // Accepted: the nonlinear history is recomputed from the accepted field.
    NonlinearTerm n_acc = nonlinear(iterate);
    if (!all_finite(n_acc)) throw StepError(StepError::Kind::non_finite, next, "nonlinear term");
    ModeArray psi_acc = s.psi;
    advance_exponential_integral(psi_acc, s.nonlinear, n_acc, mw);
    ModeArray phi_acc = s.phi;
    advance_exponential_integral(phi_acc, flux_to_modes(s.flux, tr), flux_to_modes(f_next, tr), mw);

    state_.step = next;
    state_.omega = std::move(iterate);
    state_.nonlinear = std::move(n_acc);
    state_.flux = std::move(f_next);
    state_.psi = std::move(psi_acc);
    state_.phi = std::move(phi_acc);
    state_.picard_iterations = it;
    state_.picard_last_delta = deltas_.back();
    return state_;
}

Trajectory run(const SpectrumField& initial, const EvolutionConfig& cfg, const StepHook& hook, bool keep_fields) {
    Evolver ev(initial, cfg);
    Trajectory tr;
    tr.dt = cfg.dt;
    tr.fluxes.k1max = initial.truncation().k1max;
    tr.fluxes.dt = cfg.dt;
    auto record = [&] {
        const auto& s = ev.state();
        if (keep_fields || s.step == 0 || ev.finished()) {
            tr.fields.push_back(s.omega);
            tr.nonlinear.push_back(s.nonlinear);
        }
        tr.fluxes.samples.push_back(s.flux);
        tr.picard_iterations.push_back(s.picard_iterations);
        if (hook) hook(ev);
    };
    record();
    while (!ev.finished()) {
        ev.advance();
        record();
    }
    return tr;
}

}  // namespace flatcyl
