#include "iqbound/covariance.hpp"

#include <stdexcept>

namespace iqb {

namespace {

Eigen::MatrixXcd unitary_dft_matrix(std::size_t n) {
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double ang = -2.0 * pi * static_cast<double>(k) * static_cast<double>(l) /
                               static_cast<double>(n);
            f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                scale * cplx(std::cos(ang), std::sin(ang));
        }
    }
    return f;
}

// Per-symbol covariance of the channel-distorted signal, CP-dropped form:
// circulant channel conjugated into the DFT basis, diagonal in frequency.
Eigen::MatrixXcd cov_s_check_symbol_circular(const ModelSpec& model) {
    const std::size_t n = model.config.n_dft;
    const Eigen::MatrixXcd f = unitary_dft_matrix(n);
    const rvec cd = cov_data(model.alloc, model.config.sigma_d_sq);
    const FrequencyResponse fr = frequency_response(model.channel_taps, n);
    Eigen::VectorXcd diag(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        diag(static_cast<Eigen::Index>(k)) = std::norm(fr.h_f[k]) * cd[k];
    }
    return f.adjoint() * diag.asDiagonal() * f;
}

// Per-symbol covariance including the CP rows, exact linear model.
Eigen::MatrixXcd cov_x_symbol_with_cp(const ModelSpec& model) {
    const std::size_t n = model.config.n_dft;
    const std::size_t l_cp = model.config.l_cp;
    const std::size_t n_sym = model.config.n_sym();
    const Eigen::MatrixXcd f = unitary_dft_matrix(n);
    const rvec cd = cov_data(model.alloc, model.config.sigma_d_sq);
    Eigen::VectorXcd diag(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        diag(static_cast<Eigen::Index>(k)) = cd[k];
    }
    const Eigen::MatrixXcd cx_body = f.adjoint() * diag.asDiagonal() * f;

    Eigen::MatrixXcd d_cp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_sym),
                                                   static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < l_cp; ++i) {
        d_cp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - l_cp + i)) = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        d_cp(static_cast<Eigen::Index>(l_cp + i), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return d_cp * cx_body * d_cp.adjoint();
}

} // namespace

void ModelSpec::validate() const {
    config.validate();
    if (alloc.n_dft != config.n_dft) {
        throw std::invalid_argument("ModelSpec: allocation size does not match n_dft");
    }
    if (channel_taps.empty() || channel_taps.size() > config.n_dft) {
        throw std::invalid_argument("ModelSpec: need 1 <= Q <= n_dft channel taps");
    }
    if (noise.sigma_eta_s_sq < 0.0 || noise.sigma_eta_r_sq < 0.0) {
        throw std::invalid_argument("ModelSpec: noise variances must be non-negative");
    }
}

Eigen::MatrixXcd AugmentedCovariance::assembled() const {
    const Eigen::Index n = c.rows();
    Eigen::MatrixXcd full(2 * n, 2 * n);
    full.topLeftCorner(n, n) = c;
    full.topRightCorner(n, n) = gamma;
    full.bottomLeftCorner(n, n) = gamma.conjugate();
    full.bottomRightCorner(n, n) = c.conjugate();
    return full;
}

rvec cov_data(const AllocationPattern& alloc, double sigma_d_sq) {
    if (alloc.l_s == 0) {
        throw std::invalid_argument("cov_data: allocation has no active subcarriers");
    }
    const double per_bin = sigma_d_sq / static_cast<double>(alloc.l_s);
    rvec diag(alloc.n_dft, 0.0);
    for (std::size_t k = 0; k < alloc.n_dft; ++k) {
        if (alloc.mask[k]) {
            diag[k] = per_bin;
        }
    }
    return diag;
}

Eigen::MatrixXcd cov_s_full(const ModelSpec& model, bool drop_cp, std::size_t dense_guard) {
    model.validate();
    const bool circular = drop_cp || model.config.l_cp == 0;
    const std::size_t block = circular ? model.config.n_dft : model.config.n_sym();
    const std::size_t n_total = model.config.n_ofdm * block;
    if (n_total > dense_guard) {
        throw std::invalid_argument("cov_s_full: model too large for the dense oracle");
    }
    const std::size_t q = model.channel_taps.size();
    if (!circular && q > model.config.l_cp + 1) {
        throw std::invalid_argument("cov_s_full: channel memory exceeds the cyclic prefix");
    }

    const Eigen::Index nb = static_cast<Eigen::Index>(block);
    const Eigen::Index nt = static_cast<Eigen::Index>(n_total);

    // Symbols are independent, but with a CP the channel convolution couples
    // adjacent symbols, so the Toeplitz application runs over the whole frame.
    Eigen::MatrixXcd cov_s = Eigen::MatrixXcd::Zero(nt, nt);
    if (circular) {
        const Eigen::MatrixXcd cs_symbol = cov_s_check_symbol_circular(model);
        for (std::size_t b = 0; b < model.config.n_ofdm; ++b) {
            const Eigen::Index off = static_cast<Eigen::Index>(b) * nb;
            cov_s.block(off, off, nb, nb) = cs_symbol;
        }
    } else {
        const Eigen::MatrixXcd cx_symbol = cov_x_symbol_with_cp(model);
        Eigen::MatrixXcd cov_x = Eigen::MatrixXcd::Zero(nt, nt);
        for (std::size_t b = 0; b < model.config.n_ofdm; ++b) {
            const Eigen::Index off = static_cast<Eigen::Index>(b) * nb;
            cov_x.block(off, off, nb, nb) = cx_symbol;
        }
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nt, nt);
        for (std::size_t row = 0; row < n_total; ++row) {
            for (std::size_t i = 0; i < q && i <= row; ++i) {
                h(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(row - i)) =
                    model.channel_taps[i];
            }
        }
        cov_s = h * cov_x * h.adjoint();
    }
    cov_s += model.noise.sigma_eta_s_sq * Eigen::MatrixXcd::Identity(nt, nt);
    return cov_s;
}

AugmentedCovariance cov_r_augmented_full(const ModelSpec& model, bool drop_cp,
                                         std::size_t dense_guard) {
    const Eigen::MatrixXcd cov_s = cov_s_full(model, drop_cp, dense_guard);
    const Eigen::Index nt = cov_s.rows();

    // Square QAM data is proper, every step up to here is linear, so the
    // pseudo-covariance of s is structurally zero. The imbalance then couples
    // s and conj(s): with k2 = alpha conj(k1),
    //   C_r = |k1|^2 (C_s + |alpha|^2 conj(C_s)) + sigma_eta_r^2 I,
    //   Gamma_r = |k1|^2 alpha (C_s + conj(C_s)).
    const double k1_sq = std::norm(model.params.k1);
    const cplx alpha = model.params.alpha;
    const Eigen::MatrixXcd cov_s_conj = cov_s.conjugate();

    AugmentedCovariance out;
    out.c = k1_sq * (cov_s + std::norm(alpha) * cov_s_conj) +
            model.noise.sigma_eta_r_sq * Eigen::MatrixXcd::Identity(nt, nt);
    out.gamma = (k1_sq * alpha) * (cov_s + cov_s_conj);
    return out;
}

SpectralCovariances spectral_covariances(const ModelSpec& model) {
    model.validate();
    const std::size_t n = model.config.n_dft;
    const rvec cd = cov_data(model.alloc, model.config.sigma_d_sq);
    const FrequencyResponse fr = frequency_response(model.channel_taps, n);

    SpectralCovariances sc;
    sc.k1_abs_sq = std::norm(model.params.k1);
    sc.k1 = model.params.k1;
    sc.alpha = model.params.alpha;
    sc.sigma_eta_s_sq = model.noise.sigma_eta_s_sq;
    sc.sigma_eta_r_sq = model.noise.sigma_eta_r_sq;
    sc.sigma_s_f_sq.resize(n);
    sc.sigma_s_f_img_sq.resize(n);
    sc.sigma_r_f_sq.resize(n);
    sc.sigma_r_f_img_sq.resize(n);
    sc.gamma_r_f.resize(n);

    for (std::size_t k = 0; k < n; ++k) {
        sc.sigma_s_f_sq[k] = std::norm(fr.h_f[k]) * cd[k] + sc.sigma_eta_s_sq;
    }
    const double asq = std::norm(sc.alpha);
    for (std::size_t k = 0; k < n; ++k) {
        sc.sigma_s_f_img_sq[k] = sc.sigma_s_f_sq[mirror_index(k, n)];
        sc.sigma_r_f_sq[k] =
            sc.k1_abs_sq * (sc.sigma_s_f_sq[k] + asq * sc.sigma_s_f_img_sq[k]) +
            sc.sigma_eta_r_sq;
        sc.gamma_r_f[k] =
            sc.alpha * sc.k1_abs_sq * (sc.sigma_s_f_sq[k] + sc.sigma_s_f_img_sq[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        sc.sigma_r_f_img_sq[k] = sc.sigma_r_f_sq[mirror_index(k, n)];
    }
    return sc;
}

} // namespace iqb
