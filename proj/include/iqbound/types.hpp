#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace iqb {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using rvec = std::vector<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Floor used when reporting power ratios of zero in dB.
inline constexpr double db_floor = -300.0;

/// Index of the spectral image of bin `n` in an `n_dft`-point spectrum.
inline std::size_t mirror_index(std::size_t n, std::size_t n_dft) {
    return n == 0 ? 0 : n_dft - n;
}

inline double to_db(double linear) {
    if (linear <= 0.0) {
        return db_floor;
    }
    return std::max(10.0 * std::log10(linear), db_floor);
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

} // namespace iqb
