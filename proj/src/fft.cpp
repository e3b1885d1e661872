#include "iqbound/fft.hpp"

#include <bit>
#include <stdexcept>

namespace iqb {

namespace {

void bit_reverse_permute(cvec& x) {
    const std::size_t n = x.size();
    std::size_t j = 0;
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) {
            j ^= bit;
        }
        j ^= bit;
        if (i < j) {
            std::swap(x[i], x[j]);
        }
    }
}

// Iterative radix-2 Cooley-Tukey, sign = -1 forward, +1 inverse. No scaling.
void fft_pow2(cvec& x, double sign) {
    const std::size_t n = x.size();
    bit_reverse_permute(x);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = x[i + k];
                cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// O(N^2) fallback for non-power-of-two sizes (small oracle cases only).
void dft_direct(cvec& x, double sign) {
    const std::size_t n = x.size();
    cvec out(n, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t m = 0; m < n; ++m) {
            const double ang =
                sign * 2.0 * pi * static_cast<double>(k) * static_cast<double>(m) /
                static_cast<double>(n);
            out[k] += x[m] * cplx(std::cos(ang), std::sin(ang));
        }
    }
    x = std::move(out);
}

void transform(cvec& x, double sign) {
    const std::size_t n = x.size();
    if (n == 0) {
        throw std::invalid_argument("fft: empty input");
    }
    if (std::has_single_bit(n)) {
        fft_pow2(x, sign);
    } else {
        dft_direct(x, sign);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) {
        v *= scale;
    }
}

} // namespace

void fft_unitary(cvec& x) { transform(x, -1.0); }

void ifft_unitary(cvec& x) { transform(x, +1.0); }

cvec fft_unitary_copy(std::span<const cplx> x) {
    cvec y(x.begin(), x.end());
    fft_unitary(y);
    return y;
}

cvec ifft_unitary_copy(std::span<const cplx> x) {
    cvec y(x.begin(), x.end());
    ifft_unitary(y);
    return y;
}

} // namespace iqb
