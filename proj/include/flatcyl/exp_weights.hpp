#pragma once

#include <vector>

#include "flatcyl/spectrum.hpp"

namespace flatcyl {

/// Weights of the exponential rule on one step of length dt for rate kk:
///   int_0^dt e^{-kk (dt - s)} y(s) ds ~= w0 y(0) + w1 y(dt)
/// exact when y is linear. decay = e^{-kk dt}.
struct ExpWeights {
    double decay = 1.0;
    double w0 = 0.0;
    double w1 = 0.0;
};

ExpWeights exp_weights(double kk, double dt);

/// E1(x) = (1 - e^{-x}) / x and E2(x) = (1 - (1 + x) e^{-x}) / x^2, stable near 0.
double phi1(double x);
double phi2(double x);

/// Per-mode ExpWeights for every stored mode of a truncation (rate k^2).
class ModeWeights {
  public:
    ModeWeights() = default;
    ModeWeights(Truncation tr, double dt);

    const ExpWeights& operator()(int k1, int k2) const {
        return w_[static_cast<std::size_t>(k1 + tr_.k1max) * tr_.n2() + k2];
    }
    const Truncation& truncation() const { return tr_; }
    double dt() const { return dt_; }

  private:
    Truncation tr_{};
    double dt_ = 0.0;
    std::vector<ExpWeights> w_;
};

/// acc <- decay * acc + w0 * y_prev + w1 * y_next, mode by mode.
void advance_exponential_integral(ModeArray& acc, const ModeArray& y_prev, const ModeArray& y_next,
                                  const ModeWeights& w);

}  // namespace flatcyl
