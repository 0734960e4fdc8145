#include <fftw3.h>

#include <algorithm>
#include <array>

#include "flatcyl/spectral_core.hpp"

namespace flatcyl {

namespace {

int next_smooth(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

int wrap(int k, int m) { return k >= 0 ? k : k + m; }

}  // namespace

// Product u . grad(omega) is formed on a periodic M1 x M2 grid of the hat
// (even-extended) field; M1 >= 3 K1 + 1 and M2 >= 4 K2 + 1 keep the retained
// output modes free of aliasing.
struct TransformConvolution::Impl {
    Truncation tr;
    int m1 = 0, m2 = 0;
    std::array<fftw_complex*, 5> buf{};
    fftw_plan backward = nullptr;
    fftw_plan forward = nullptr;

    explicit Impl(Truncation t) : tr(t) {
        m1 = next_smooth(3 * tr.k1max + 1);
        m2 = next_smooth(4 * tr.k2max + 1);
        const std::size_t n = static_cast<std::size_t>(m1) * m2;
        for (auto& b : buf) {
            b = fftw_alloc_complex(n);
            if (!b) throw NumericalFailure("TransformConvolution: allocation failed");
        }
        backward = fftw_plan_dft_2d(m1, m2, buf[0], buf[0], FFTW_BACKWARD, FFTW_ESTIMATE);
        forward = fftw_plan_dft_2d(m1, m2, buf[4], buf[4], FFTW_FORWARD, FFTW_ESTIMATE);
        if (!backward || !forward) throw NumericalFailure("TransformConvolution: FFT planning failed");
    }
    ~Impl() {
        if (backward) fftw_destroy_plan(backward);
        if (forward) fftw_destroy_plan(forward);
        for (auto b : buf) fftw_free(b);
    }

    cplx* at(int i) { return reinterpret_cast<cplx*>(buf[i]); }
    std::size_t idx(int k1, int k2) const {
        return static_cast<std::size_t>(wrap(k1, m1)) * m2 + wrap(k2, m2);
    }

    HatArray run(const ModeArray& field) {
        if (!(field.truncation() == tr)) throw InvalidInput("TransformConvolution: truncation mismatch");
        const std::size_t n = static_cast<std::size_t>(m1) * m2;
        for (int i = 0; i < 4; ++i) std::fill(at(i), at(i) + n, cplx{});
        const cplx I{0.0, 1.0};
        for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
            for (int k2 = -tr.k2max; k2 <= tr.k2max; ++k2) {
                const cplx w = field.hat(k1, k2);
                const std::size_t p = idx(k1, k2);
                const int kk = k1 * k1 + k2 * k2;
                if (kk != 0) {
                    at(0)[p] = I * static_cast<double>(k2) * w / static_cast<double>(kk);
                    at(1)[p] = -I * static_cast<double>(k1) * w / static_cast<double>(kk);
                }
                at(2)[p] = I * static_cast<double>(k1) * w;
                at(3)[p] = I * static_cast<double>(k2) * w;
            }
        for (int i = 0; i < 4; ++i) fftw_execute_dft(backward, buf[i], buf[i]);
        for (std::size_t p = 0; p < n; ++p) at(4)[p] = at(0)[p] * at(2)[p] + at(1)[p] * at(3)[p];
        fftw_execute(forward);
        const double scale = 1.0 / static_cast<double>(n);
        HatArray r(tr.k1max, 2 * tr.k2max);
        for (int k1 = -tr.k1max; k1 <= tr.k1max; ++k1)
            for (int h2 = -2 * tr.k2max; h2 <= 2 * tr.k2max; ++h2) r(k1, h2) = at(4)[idx(k1, h2)] * scale;
        return r;
    }
};

TransformConvolution::TransformConvolution(Truncation tr) : impl_(std::make_unique<Impl>(tr)) {}
TransformConvolution::~TransformConvolution() = default;

HatArray TransformConvolution::operator()(const ModeArray& field) { return impl_->run(field); }
int TransformConvolution::grid_n1() const { return impl_->m1; }
int TransformConvolution::grid_n2() const { return impl_->m2; }

}  // namespace flatcyl
