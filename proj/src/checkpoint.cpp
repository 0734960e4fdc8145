#include <fstream>
#include <map>

#include "flatcyl/evolution.hpp"
#include "text_io.hpp"

namespace flatcyl {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view ctx = "checkpoint manifest";

const char* path_name(ConvolutionPath p) { return p == ConvolutionPath::direct ? "direct" : "transform"; }

std::map<std::string, std::string> read_manifest(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw InvalidInput("cannot open " + p.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput("checkpoint manifest: malformed line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw InvalidInput("checkpoint manifest: missing key '" + key + "'");
    return it->second;
}

}  // namespace

void write_checkpoint(const fs::path& dir, const Evolver& ev, const BoundaryFluxHistory& fluxes) {
    using detail::fmt_double;
    const auto& s = ev.state();
    const auto& cfg = ev.config();
    const auto& tr = ev.initial().truncation();
    if (fluxes.samples.size() != static_cast<std::size_t>(s.step) + 1)
        throw InvalidInput("write_checkpoint: flux history length does not match the state step");
    fs::create_directories(dir);
    write_snapshot(dir / "initial.txt", ev.initial());
    write_snapshot(dir / "state.txt", s.omega);
    write_mode_array(dir / "nonlinear.txt", s.nonlinear, s.omega.time);
    write_mode_array(dir / "psi.txt", s.psi, s.omega.time);
    write_mode_array(dir / "phi.txt", s.phi, s.omega.time);
    write_flux_history(dir / "flux.txt", fluxes);
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw InvalidInput("cannot write checkpoint manifest in " + dir.string());
    os << "k1max=" << tr.k1max << '\n'
       << "k2max=" << tr.k2max << '\n'
       << "dt=" << fmt_double(cfg.dt) << '\n'
       << "T=" << fmt_double(cfg.T) << '\n'
       << "picard_tol=" << fmt_double(cfg.picard_tol) << '\n'
       << "picard_max_iters=" << cfg.picard_max_iters << '\n'
       << "constraint_tol=" << fmt_double(cfg.constraint_tol) << '\n'
       << "convolution=" << path_name(cfg.convolution) << '\n'
       << "linear_only=" << (cfg.linear_only ? 1 : 0) << '\n'
       << "step=" << s.step << '\n'
       << "picard_iterations=" << s.picard_iterations << '\n'
       << "picard_last_delta=" << fmt_double(s.picard_last_delta) << '\n';
    if (!os) throw InvalidInput("failed writing checkpoint manifest in " + dir.string());
}

Checkpoint read_checkpoint(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw InvalidInput("checkpoint directory " + dir.string() + " does not exist");
    const auto kv = read_manifest(dir / "manifest.txt");
    Checkpoint ck;
    Truncation tr{detail::parse_int(need(kv, "k1max"), ctx, "k1max"), detail::parse_int(need(kv, "k2max"), ctx, "k2max")};
    auto& cfg = ck.config;
    cfg.dt = detail::parse_double(need(kv, "dt"), ctx, "dt");
    cfg.T = detail::parse_double(need(kv, "T"), ctx, "T");
    cfg.picard_tol = detail::parse_double(need(kv, "picard_tol"), ctx, "picard_tol");
    cfg.picard_max_iters = detail::parse_int(need(kv, "picard_max_iters"), ctx, "picard_max_iters");
    cfg.constraint_tol = detail::parse_double(need(kv, "constraint_tol"), ctx, "constraint_tol");
    const auto& conv = need(kv, "convolution");
    if (conv == "direct") cfg.convolution = ConvolutionPath::direct;
    else if (conv == "transform") cfg.convolution = ConvolutionPath::transform;
    else throw InvalidInput("checkpoint manifest: unknown convolution '" + conv + "'");
    cfg.linear_only = detail::parse_int(need(kv, "linear_only"), ctx, "linear_only") != 0;
    cfg.validate();

    auto& s = ck.state;
    s.step = detail::parse_int<long>(need(kv, "step"), ctx, "step");
    s.picard_iterations = detail::parse_int(need(kv, "picard_iterations"), ctx, "picard_iterations");
    s.picard_last_delta = detail::parse_double(need(kv, "picard_last_delta"), ctx, "picard_last_delta");
    if (s.step < 0 || s.step > cfg.steps()) throw InvalidInput("checkpoint manifest: step out of range");

    ck.initial = read_snapshot(dir / "initial.txt");
    if (!(ck.initial.truncation() == tr)) throw InvalidInput("checkpoint: initial field truncation disagrees with manifest");
    s.omega = read_snapshot(dir / "state.txt");
    if (!(s.omega.truncation() == tr)) throw InvalidInput("checkpoint: state truncation disagrees with manifest");
    if (s.omega.time != static_cast<double>(s.step) * cfg.dt)
        throw InvalidInput("checkpoint: state time disagrees with step * dt");
    ModeArray n = read_mode_array(dir / "nonlinear.txt", tr);
    s.nonlinear = NonlinearTerm(tr);
    std::copy(n.data().begin(), n.data().end(), s.nonlinear.data().begin());
    s.psi = read_mode_array(dir / "psi.txt", tr);
    s.phi = read_mode_array(dir / "phi.txt", tr);
    ck.fluxes = read_flux_history(dir / "flux.txt");
    if (ck.fluxes.k1max != tr.k1max || ck.fluxes.dt != cfg.dt ||
        ck.fluxes.samples.size() != static_cast<std::size_t>(s.step) + 1)
        throw InvalidInput("checkpoint: flux history disagrees with manifest");
    s.flux = ck.fluxes.samples.back();
    return ck;
}

void require_compatible(const Checkpoint& ck, const EvolutionConfig& cfg) {
    const auto& a = ck.config;
    auto fail = [](const std::string& what) { throw InvalidInput("restart manifest mismatch: " + what); };
    if (a.dt != cfg.dt) fail("dt");
    if (a.picard_tol != cfg.picard_tol) fail("picard_tol");
    if (a.picard_max_iters != cfg.picard_max_iters) fail("picard_max_iters");
    if (a.constraint_tol != cfg.constraint_tol) fail("constraint_tol");
    if (a.convolution != cfg.convolution) fail("convolution");
    if (a.linear_only != cfg.linear_only) fail("linear_only");
    if (cfg.steps() < ck.state.step) fail("T precedes the checkpoint time");
}

}  // namespace flatcyl
