#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace flatcyl {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Truncation of the Neumann basis: |k1| <= k1max, 0 <= k2 <= k2max.
struct Truncation {
    int k1max = 0;
    int k2max = 0;

    int n1() const { return 2 * k1max + 1; }
    int n2() const { return k2max + 1; }
    std::size_t size() const { return static_cast<std::size_t>(n1()) * n2(); }
    bool contains(int k1, int k2) const {
        return k1 >= -k1max && k1 <= k1max && k2 >= 0 && k2 <= k2max;
    }
    friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Index of a Neumann mode e^{i k1 x1} cos(k2 x2).
struct ModeIndex {
    int k1 = 0;
    int k2 = 0;

    int norm2() const { return k1 * k1 + k2 * k2; }
    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Parity class of k2. `even` selects the "+" sums (a_0 + 2 sum a_{2i}),
/// `odd` the "-" sums (2 sum a_{2i-1}).
enum class Parity { even, odd };

inline Parity parity_of(int k2) { return (k2 % 2 == 0) ? Parity::even : Parity::odd; }
inline int parity_slot(Parity p) { return p == Parity::even ? 0 : 1; }
inline const char* parity_name(Parity p) { return p == Parity::even ? "+" : "-"; }

/// Weight of the k2-th term in the parity sums and in the Neumann series:
/// 1 for k2 = 0, 2 otherwise.
inline double neumann_weight(int k2) { return k2 == 0 ? 1.0 : 2.0; }

/// Thrown when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver its contract
/// (non-convergence, non-finite values, ill-conditioning).
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace flatcyl
