#pragma once

#include "iqbound/covariance.hpp"
#include "iqbound/types.hpp"

namespace iqb {

enum class BoundPath { full, fast, simplified };

/// Fisher information for the parameter pair (k1, alpha). j21 = conj(j12) by
/// construction. infinite_information marks degenerate models (no noise and
/// asymmetric spectral content) where alpha is exactly computable and the
/// variance bound collapses to zero.
struct Fim2x2 {
    double j11 = 0.0;
    double j22 = 0.0;
    cplx j12{0.0, 0.0};
    BoundPath path = BoundPath::fast;
    bool infinite_information = false;

    cplx j21() const { return std::conj(j12); }
};

struct CrlbResult {
    double var_alpha = 0.0;
    Fim2x2 fim;
    bool zero_bound = false; // set for flagged infinite-information models

    double var_alpha_db() const { return to_db(var_alpha); }
};

/// Dense-oracle Fisher information on the assembled 2N x 2N augmented
/// covariance. Small sizes only; throws with a condition diagnostic when the
/// covariance is numerically singular.
Fim2x2 fim_full(const ModelSpec& model, bool drop_cp = false, std::size_t dense_guard = 4096);

/// Per-bin evaluation of the same Fisher information on the CP-dropped model.
/// Every matrix involved is diagonal in the DFT basis, so each bin contributes
/// an independent 2x2 trace term and the cost is linear in n_dft.
Fim2x2 fim_fast(const SpectralCovariances& spectral, std::size_t n_ofdm);

/// Variance bound for alpha with k1 treated as a nuisance parameter:
/// var >= j11 / (j11 j22 - |j12|^2).
CrlbResult crlb_alpha(const Fim2x2& fim);

/// Small-imbalance closed-ish form evaluated at the operating point
/// |k1| = 1, alpha = 0; depends on the model only through the per-bin
/// signal-plus-noise spectra.
CrlbResult crlb_simplified(const SpectralCovariances& spectral, std::size_t n_ofdm);

/// Flat-channel closed forms. xi_r is the post-imbalance SNR; pass infinity
/// for the zero-noise case. The symmetric zero-noise value is exactly
/// 1 / (2 l_s n_ofdm); published closed-form analyses of moment-based blind
/// estimators at full allocation land at twice this value.
double crlb_symmetric_closed(std::size_t l_s, std::size_t n_dft, std::size_t n_ofdm,
                             double xi_r);
double crlb_asymmetric_closed(std::size_t l_s, std::size_t n_dft, std::size_t n_ofdm,
                              double xi_r);

/// Post-imbalance SNR consistent with the closed forms: the per-sample power
/// of the imbalanced signal component, sigma_d_sq / n_dft * |k1|^2 (1+|alpha|^2),
/// divided by the post-imbalance noise variance.
double post_imbalance_snr(double sigma_d_sq, std::size_t n_dft, const ImbalanceParams& params,
                          double sigma_eta_r_sq);

} // namespace iqb
