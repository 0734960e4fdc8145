#include "flatcyl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "text_io.hpp"

namespace flatcyl {

namespace {

using detail::fmt_double;

double parse_double(std::string_view s, const char* what) { return detail::parse_double(s, "snapshot", what); }
int parse_int(std::string_view s, const char* what) { return detail::parse_int(s, "snapshot", what); }
std::string_view value_after(std::string_view token, std::string_view key) {
    return detail::value_after(token, key, "snapshot");
}

struct RawSnapshot {
    Truncation tr;
    double t = 0.0;
    ModeArray a;
};

RawSnapshot read_raw(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("snapshot: empty input");
    std::istringstream hs(line);
    std::string a, b, c;
    if (!(hs >> a >> b >> c)) throw InvalidInput("snapshot: malformed header");
    RawSnapshot raw;
    raw.tr.k1max = parse_int(value_after(a, "k1max="), "k1max");
    raw.tr.k2max = parse_int(value_after(b, "k2max="), "k2max");
    raw.t = parse_double(value_after(c, "t="), "t");
    if (raw.tr.k1max < 0 || raw.tr.k2max < 0) throw InvalidInput("snapshot: negative truncation");
    raw.a = ModeArray(raw.tr);
    std::string s1, s2, sr, si;
    for (int k1 = -raw.tr.k1max; k1 <= raw.tr.k1max; ++k1) {
        for (int k2 = 0; k2 <= raw.tr.k2max; ++k2) {
            if (!(is >> s1 >> s2 >> sr >> si)) throw InvalidInput("snapshot: truncated mode list");
            if (parse_int(s1, "k1") != k1 || parse_int(s2, "k2") != k2)
                throw InvalidInput("snapshot: modes out of lexicographic order at (" + s1 + "," + s2 + ")");
            raw.a(k1, k2) = {parse_double(sr, "re"), parse_double(si, "im")};
        }
    }
    if (is >> s1) throw InvalidInput("snapshot: trailing data after mode list");
    return raw;
}

void write_raw(std::ostream& os, const ModeArray& a, double t) {
    const auto& tr = a.truncation();
    os << "k1max=" << tr.k1max << " k2max=" << tr.k2max << " t=" << fmt_double(t) << '\n';
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const cplx v = a(k1, k2);
            os << k1 << ' ' << k2 << ' ' << fmt_double(v.real()) << ' ' << fmt_double(v.imag()) << '\n';
        }
}

}  // namespace

double ModeArray::max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
}

void ModeArray::set_zero() { std::fill(c_.begin(), c_.end(), cplx{}); }

double reality_defect(const ModeArray& a) {
    const auto& tr = a.truncation();
    double d = 0.0;
    for (int k1 = 0; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2)
            d = std::max(d, std::abs(a(-k1, k2) - std::conj(a(k1, k2))));
    return d;
}

void require_well_formed(const SpectrumField& f, const char* context) {
    const double scale = std::max(f.max_abs(), 1e-300);
    const double tol = invariant_rel_tol * scale;
    if (reality_defect(f) > tol)
        throw InvalidInput(std::string(context) + ": field violates reality (omega_{-k1,k2} != conj omega_{k1,k2})");
    if (std::abs(f(0, 0)) > tol)
        throw InvalidInput(std::string(context) + ": field has nonzero mean (omega_{0,0} != 0)");
}

void enforce_reality(ModeArray& a) {
    const auto& tr = a.truncation();
    for (int k2 = 0; k2 <= tr.k2max; ++k2) a(0, k2) = {a(0, k2).real(), 0.0};
    for (int k1 = 1; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) a(-k1, k2) = std::conj(a(k1, k2));
}

void write_snapshot(std::ostream& os, const SpectrumField& f) {
    require_well_formed(f, "write_snapshot");
    write_raw(os, f, f.time);
}

void write_snapshot(const std::filesystem::path& p, const SpectrumField& f) {
    std::ofstream os(p);
    if (!os) throw InvalidInput("cannot open " + p.string() + " for writing");
    write_snapshot(os, f);
}

SpectrumField read_snapshot(std::istream& is) {
    RawSnapshot raw = read_raw(is);
    SpectrumField f(raw.tr, raw.t);
    std::copy(raw.a.data().begin(), raw.a.data().end(), f.data().begin());
    require_well_formed(f, "read_snapshot");
    return f;
}

SpectrumField read_snapshot(const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw InvalidInput("cannot open " + p.string());
    return read_snapshot(is);
}

void write_mode_array(const std::filesystem::path& p, const ModeArray& a, double t) {
    std::ofstream os(p);
    if (!os) throw InvalidInput("cannot open " + p.string() + " for writing");
    write_raw(os, a, t);
}

ModeArray read_mode_array(const std::filesystem::path& p, Truncation expected) {
    std::ifstream is(p);
    if (!is) throw InvalidInput("cannot open " + p.string());
    RawSnapshot raw = read_raw(is);
    if (!(raw.tr == expected)) throw InvalidInput(p.string() + ": truncation does not match");
    return raw.a;
}

}  // namespace flatcyl
