#pragma once

#include <Eigen/Dense>

#include "iqbound/channel.hpp"
#include "iqbound/impairment.hpp"
#include "iqbound/types.hpp"
#include "iqbound/waveform.hpp"

namespace iqb {

/// Everything the received-signal statistics depend on.
struct ModelSpec {
    OfdmConfig config;
    AllocationPattern alloc;
    cvec channel_taps{cplx(1.0, 0.0)};
    NoiseSpec noise;
    ImbalanceParams params;

    void validate() const;
};

/// Second-order description of an improper complex vector: covariance block C
/// (Hermitian) and pseudo-covariance block Gamma (symmetric). The assembled
/// form is the 2N x 2N matrix [[C, Gamma], [conj(Gamma), conj(C)]].
struct AugmentedCovariance {
    Eigen::MatrixXcd c;
    Eigen::MatrixXcd gamma;

    Eigen::MatrixXcd assembled() const;
};

/// Diagonal of the frequency-domain data covariance: (sigma_d_sq / l_s) psi.
rvec cov_data(const AllocationPattern& alloc, double sigma_d_sq);

/// Dense covariance of the noisy pre-imbalance signal s over the whole frame.
///
/// With a CP present this uses the exact linear model (Toeplitz channel
/// matrix, CP duplication rows). With drop_cp, or when l_cp == 0, the CP rows
/// and columns are removed and the channel acts circularly per symbol, which
/// matches the exact model whenever the channel memory fits inside the CP.
/// Intended as a small-size oracle; guarded against large N.
Eigen::MatrixXcd cov_s_full(const ModelSpec& model, bool drop_cp = false,
                            std::size_t dense_guard = 4096);

/// Dense augmented covariance of the received signal r: the imbalance mixes s
/// with conj(s) and the post-imbalance noise adds on the diagonal.
AugmentedCovariance cov_r_augmented_full(const ModelSpec& model, bool drop_cp = false,
                                         std::size_t dense_guard = 4096);

/// O(N_DFT) representation of the CP-dropped covariance model: all matrices
/// involved share the DFT eigenbasis, so per-bin variances and the per-bin
/// pseudo-variance describe them completely.
struct SpectralCovariances {
    rvec sigma_s_f_sq;     // per-bin variance of the pre-imbalance signal
    rvec sigma_s_f_img_sq; // same, at the image bin
    rvec sigma_r_f_sq;     // per-bin variance of the received signal
    rvec sigma_r_f_img_sq; // same, at the image bin
    cvec gamma_r_f;        // per-bin pseudo-variance of the received signal
    double k1_abs_sq = 1.0;
    cplx k1{1.0, 0.0}; // phase needed by the information-matrix cross terms
    cplx alpha{0.0, 0.0};
    double sigma_eta_s_sq = 0.0;
    double sigma_eta_r_sq = 0.0;
};

SpectralCovariances spectral_covariances(const ModelSpec& model);

} // namespace iqb
