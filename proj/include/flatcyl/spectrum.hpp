#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "flatcyl/types.hpp"

namespace flatcyl {

/// Complex coefficients on the stored Neumann lattice |k1| <= K1, 0 <= k2 <= K2,
/// laid out k1-major (lexicographic in (k1, k2)).
class ModeArray {
  public:
    ModeArray() = default;
    explicit ModeArray(Truncation tr) : tr_(tr), c_(tr.size(), cplx{}) {}

    const Truncation& truncation() const { return tr_; }
    std::size_t index(int k1, int k2) const {
        return static_cast<std::size_t>(k1 + tr_.k1max) * tr_.n2() + k2;
    }
    cplx& operator()(int k1, int k2) { return c_[index(k1, k2)]; }
    const cplx& operator()(int k1, int k2) const { return c_[index(k1, k2)]; }

    /// Even extension in k2: value at (k1, |k2|), zero outside the truncation.
    cplx hat(int k1, int k2) const {
        const int a = k2 < 0 ? -k2 : k2;
        return tr_.contains(k1, a) ? c_[index(k1, a)] : cplx{};
    }

    std::span<cplx> data() { return c_; }
    std::span<const cplx> data() const { return c_; }

    double max_abs() const;
    void set_zero();

  private:
    Truncation tr_{};
    std::vector<cplx> c_;
};

/// Vorticity coefficients omega_{k1,k2}(t): the system state.
class SpectrumField : public ModeArray {
  public:
    SpectrumField() = default;
    explicit SpectrumField(Truncation tr, double t = 0.0) : ModeArray(tr), time(t) {}

    double time = 0.0;
};

/// Coefficients N_{k1,k2} of the advection term u . grad(omega) on the Neumann basis.
class NonlinearTerm : public ModeArray {
  public:
    using ModeArray::ModeArray;
};

/// Full-lattice (hat) array over |k1| <= K1, |k2| <= L. Used for the hat
/// convolution R_{k1,h2}, whose h2 support is twice the field's.
class HatArray {
  public:
    HatArray() = default;
    HatArray(int k1max, int k2max)
        : k1max_(k1max), k2max_(k2max),
          c_(static_cast<std::size_t>(2 * k1max + 1) * (2 * k2max + 1), cplx{}) {}

    int k1max() const { return k1max_; }
    int k2max() const { return k2max_; }
    std::size_t index(int k1, int k2) const {
        return static_cast<std::size_t>(k1 + k1max_) * (2 * k2max_ + 1) + (k2 + k2max_);
    }
    cplx& operator()(int k1, int k2) { return c_[index(k1, k2)]; }
    const cplx& operator()(int k1, int k2) const { return c_[index(k1, k2)]; }
    std::span<cplx> data() { return c_; }
    std::span<const cplx> data() const { return c_; }

  private:
    int k1max_ = 0;
    int k2max_ = 0;
    std::vector<cplx> c_;
};

/// Velocity modes u_k = -i k_perp hat(omega)_k / k^2 over the hat lattice,
/// k = (0,0) stored as zero.
struct VelocitySpectrum {
    HatArray u1;
    HatArray u2;
};

/// Largest |omega_{-k1,k2} - conj(omega_{k1,k2})| over stored modes.
double reality_defect(const ModeArray& a);

/// Tolerance used when validating reality and zero mean of stored fields,
/// relative to the largest coefficient.
inline constexpr double invariant_rel_tol = 1e-13;

/// Throws InvalidInput unless reality and zero mean hold to invariant_rel_tol.
void require_well_formed(const SpectrumField& f, const char* context);

/// Makes the array exactly conjugate-symmetric: the k1 > 0 half is kept,
/// the k1 < 0 half mirrored and the k1 = 0 column made real.
void enforce_reality(ModeArray& a);

// Snapshot text format: header `k1max=<K1> k2max=<K2> t=<time>`, then one line
// `k1 k2 re im` per stored mode in lexicographic order.
void write_snapshot(std::ostream& os, const SpectrumField& f);
void write_snapshot(const std::filesystem::path& p, const SpectrumField& f);
/// Rejects malformed files and fields violating reality or zero mean.
SpectrumField read_snapshot(std::istream& is);
SpectrumField read_snapshot(const std::filesystem::path& p);

/// Same format for auxiliary arrays (checkpoint state). Only the layout is checked.
void write_mode_array(const std::filesystem::path& p, const ModeArray& a, double t);
ModeArray read_mode_array(const std::filesystem::path& p, Truncation expected);

}  // namespace flatcyl
