#include "flatcyl/exp_weights.hpp"

#include <cmath>

namespace flatcyl {

double phi1(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
    return -std::expm1(-x) / x;
}

double phi2(double x) {
    if (std::abs(x) < 0.5) {
        // sum_n (-x)^n / (n! (n + 2))
        double term = 1.0, s = 0.5;
        for (int n = 1; n < 30; ++n) {
            term *= -x / n;
            const double add = term / (n + 2);
            s += add;
            if (std::abs(add) < 1e-18 * std::abs(s)) break;
        }
        return s;
    }
    return (1.0 - (1.0 + x) * std::exp(-x)) / (x * x);
}

ExpWeights exp_weights(double kk, double dt) {
    const double x = kk * dt;
    const double e1 = phi1(x), e2 = phi2(x);
    return {std::exp(-x), dt * e2, dt * (e1 - e2)};
}

ModeWeights::ModeWeights(Truncation tr, double dt) : tr_(tr), dt_(dt), w_(tr.size()) {
    if (!(dt > 0.0)) throw InvalidInput("ModeWeights: dt must be positive");
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2)
            w_[static_cast<std::size_t>(k1 + tr.k1max) * tr.n2() + k2] =
                exp_weights(static_cast<double>(k1 * k1 + k2 * k2), dt);
}

void advance_exponential_integral(ModeArray& acc, const ModeArray& y_prev, const ModeArray& y_next,
                                  const ModeWeights& w) {
    const auto& tr = acc.truncation();
    for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
        for (int k2 = 0; k2 <= tr.k2max; ++k2) {
            const auto& e = w(k1, k2);
            acc(k1, k2) = e.decay * acc(k1, k2) + e.w0 * y_prev(k1, k2) + e.w1 * y_next(k1, k2);
        }
}

}  // namespace flatcyl
