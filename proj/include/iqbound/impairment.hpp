#pragma once

#include "iqbound/rng.hpp"
#include "iqbound/types.hpp"
#include "iqbound/waveform.hpp"

namespace iqb {

/// Frequency-independent receiver I/Q imbalance.
///
/// The gain/phase mismatch (epsilon, phi) maps to the pair
///   k1 = cos(phi/2) - j epsilon sin(phi/2),
///   k2 = epsilon cos(phi/2) + j sin(phi/2),
/// optionally rotated by a common local-oscillator phase exp(j lo_phase) that
/// leaves the image leakage ratio untouched (a subsequent equalizer absorbs
/// it). The compensation-relevant parameter is alpha = k2 / conj(k1).
struct ImbalanceParams {
    double epsilon = 0.0;
    double phi = 0.0;
    double lo_phase = 0.0;
    cplx k1{1.0, 0.0};
    cplx k2{0.0, 0.0};
    cplx alpha{0.0, 0.0};
    double ilr_db = db_floor;
};

struct NoiseSpec {
    double sigma_eta_s_sq = 0.0; // pre-imbalance (channel + analog front end)
    double sigma_eta_r_sq = 0.0; // post-imbalance (thermal)
};

ImbalanceParams from_gain_phase(double epsilon, double phi);

/// Random imbalance hitting an exact target ILR: |alpha| = 10^(ilr_db/20)
/// with arg(alpha) uniform. Realized as epsilon = |alpha|, phi = 0 and
/// lo_phase = arg(alpha)/2, which keeps |k1| = 1.
ImbalanceParams from_target_ilr(double ilr_db, RandomStream& rng);

/// Per-sample widely linear distortion r[n] = k1 s[n] + k2 conj(s[n]).
TimeDomainFrame apply_imbalance(const TimeDomainFrame& frame, const ImbalanceParams& params);

/// Adds i.i.d. circular complex Gaussian noise with total variance sigma_sq
/// per sample (sigma_sq / 2 per real component).
TimeDomainFrame add_noise(const TimeDomainFrame& frame, double sigma_sq, RandomStream& rng);

/// Widely linear image suppression s_hat[n] = r[n] - alpha_hat conj(r[n]).
TimeDomainFrame compensate(const TimeDomainFrame& frame, cplx alpha_hat);

/// Image leakage remaining after compensating with alpha_hat. The exact form
/// is 10 log10(|alpha - alpha_hat|^2 / |1 - alpha_hat conj(alpha)|^2); the
/// approximate form drops the denominator (valid while alpha*alpha_hat is
/// small). Ratios of zero are reported as the -300 dB floor.
double residual_ilr_db(cplx alpha, cplx alpha_hat, bool exact);

} // namespace iqb
