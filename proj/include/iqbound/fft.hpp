#pragma once

#include <span>

#include "iqbound/types.hpp"

namespace iqb {

/// In-place unitary DFT: X[k] = (1/sqrt(N)) * sum_n x[n] exp(-j 2 pi k n / N).
/// Radix-2 for power-of-two sizes, direct evaluation otherwise.
void fft_unitary(cvec& x);

/// In-place unitary inverse DFT (adjoint of fft_unitary).
void ifft_unitary(cvec& x);

cvec fft_unitary_copy(std::span<const cplx> x);
cvec ifft_unitary_copy(std::span<const cplx> x);

} // namespace iqb
