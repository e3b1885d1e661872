#include "iqbound/crlb.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <stdexcept>

namespace iqb {

namespace {

bool degenerate_noiseless_asymmetric(const ModelSpec& model) {
    if (model.noise.sigma_eta_s_sq > 0.0 || model.noise.sigma_eta_r_sq > 0.0) {
        return false;
    }
    return std::any_of(model.alloc.asym_mask.begin(), model.alloc.asym_mask.end(),
                       [](auto v) { return v != 0; });
}

double real_checked(cplx v, const char* what) {
    if (std::abs(v.imag()) > 1e-7 * std::abs(v)) {
        throw std::runtime_error(std::string("fim: ") + what + " has a non-real value");
    }
    return v.real();
}

void check_hermitian(cplx j12, cplx j21, double j11, double j22, const char* who) {
    const double scale = std::abs(j12) + std::sqrt(std::max(j11 * j22, 0.0)) + 1e-300;
    if (std::abs(j21 - std::conj(j12)) > 1e-7 * scale) {
        throw std::runtime_error(std::string(who) +
                                 ": information matrix lost Hermitian symmetry");
    }
}

// tr(A * B) for square matrices without forming the product.
cplx trace_product(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a.transpose().cwiseProduct(b)).sum();
}

// 2x2 complex matrix, row-major; covers the per-bin algebra of the fast path.
struct C2 {
    cplx m00, m01, m10, m11;

    C2 operator*(const C2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    cplx trace() const { return m00 + m11; }
};

cplx tr2(const C2& a, const C2& b) { return (a * b).trace(); }

} // namespace

Fim2x2 fim_full(const ModelSpec& model, bool drop_cp, std::size_t dense_guard) {
    model.validate();
    if (degenerate_noiseless_asymmetric(model)) {
        Fim2x2 fim;
        fim.path = BoundPath::full;
        fim.infinite_information = true;
        return fim;
    }

    const Eigen::MatrixXcd cov_s = cov_s_full(model, drop_cp, dense_guard);
    const Eigen::Index n = cov_s.rows();
    const double k1_sq = std::norm(model.params.k1);
    const cplx k1 = model.params.k1;
    const cplx alpha = model.params.alpha;
    const double asq = std::norm(alpha);
    const Eigen::MatrixXcd cov_s_conj = cov_s.conjugate();
    const Eigen::MatrixXcd two_re = cov_s + cov_s_conj;

    Eigen::MatrixXcd cbar(2 * n, 2 * n);
    cbar.topLeftCorner(n, n) =
        k1_sq * (cov_s + asq * cov_s_conj) +
        model.noise.sigma_eta_r_sq * Eigen::MatrixXcd::Identity(n, n);
    cbar.topRightCorner(n, n) = (k1_sq * alpha) * two_re;
    cbar.bottomLeftCorner(n, n) = (k1_sq * std::conj(alpha)) * two_re;
    cbar.bottomRightCorner(n, n) =
        k1_sq * (cov_s_conj + asq * cov_s) +
        model.noise.sigma_eta_r_sq * Eigen::MatrixXcd::Identity(n, n);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cbar);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-13)) {
        std::ostringstream msg;
        msg << "fim_full: augmented covariance is numerically singular (rcond = " << rcond
            << ")";
        throw std::runtime_error(msg.str());
    }
    const Eigen::MatrixXcd inv = lu.inverse();

    const auto block = [n](const Eigen::MatrixXcd& nw, const Eigen::MatrixXcd& ne,
                           const Eigen::MatrixXcd& sw, const Eigen::MatrixXcd& se) {
        Eigen::MatrixXcd m(2 * n, 2 * n);
        m.topLeftCorner(n, n) = nw;
        m.topRightCorner(n, n) = ne;
        m.bottomLeftCorner(n, n) = sw;
        m.bottomRightCorner(n, n) = se;
        return m;
    };

    const Eigen::MatrixXcd d_k1 =
        std::conj(k1) * block(cov_s + asq * cov_s_conj, alpha * two_re,
                              std::conj(alpha) * two_re, asq * cov_s + cov_s_conj);
    const Eigen::MatrixXcd d_alpha =
        k1_sq * block(std::conj(alpha) * cov_s_conj, two_re, Eigen::MatrixXcd::Zero(n, n),
                      std::conj(alpha) * cov_s);
    const Eigen::MatrixXcd d_alpha_conj =
        k1_sq * block(alpha * cov_s_conj, Eigen::MatrixXcd::Zero(n, n), two_re,
                      alpha * cov_s);

    // The derivative w.r.t. conj(k1) equals (k1 / conj(k1)) times the one
    // w.r.t. k1, so the cross traces only need that unit phase factor.
    const cplx k1_phase_sq = k1 / std::conj(k1);
    const Eigen::MatrixXcd p_k1 = inv * d_k1;
    const Eigen::MatrixXcd p_alpha = inv * d_alpha;
    const Eigen::MatrixXcd p_alpha_conj = inv * d_alpha_conj;

    Fim2x2 fim;
    fim.path = BoundPath::full;
    fim.j11 = real_checked(0.5 * k1_phase_sq * trace_product(p_k1, p_k1), "j11");
    fim.j12 = 0.5 * trace_product(p_k1, p_alpha_conj);
    const cplx j21 = 0.5 * k1_phase_sq * trace_product(p_alpha, p_k1);
    fim.j22 = real_checked(0.5 * trace_product(p_alpha, p_alpha_conj), "j22");
    check_hermitian(fim.j12, j21, fim.j11, fim.j22, "fim_full");
    return fim;
}

Fim2x2 fim_fast(const SpectralCovariances& spectral, std::size_t n_ofdm) {
    if (n_ofdm < 1) {
        throw std::invalid_argument("fim_fast: n_ofdm must be at least 1");
    }
    const std::size_t n = spectral.sigma_s_f_sq.size();
    const double k1_sq = spectral.k1_abs_sq;
    if (k1_sq <= 0.0) {
        throw std::invalid_argument("fim_fast: |k1| must be positive");
    }
    const cplx k1 = spectral.k1;
    const cplx alpha = spectral.alpha;
    const double asq = std::norm(alpha);

    Fim2x2 fim;
    fim.path = BoundPath::fast;
    cplx j11(0.0, 0.0), j12(0.0, 0.0), j21(0.0, 0.0), j22(0.0, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const double a = spectral.sigma_s_f_sq[k];
        const double b = spectral.sigma_s_f_img_sq[k];
        const double crn = spectral.sigma_r_f_sq[k];
        const double cri = spectral.sigma_r_f_img_sq[k];
        const cplx g = spectral.gamma_r_f[k];

        const double content = std::max({crn, cri, std::abs(g)});
        if (content == 0.0) {
            continue; // unallocated, noiseless bin: no information
        }
        const double det = crn * cri - std::norm(g);
        if (det <= 1e-14 * content * content) {
            // Rank-deficient bin with spectral content: the observation pins
            // alpha exactly (noiseless asymmetric support), so the bound
            // collapses to zero.
            fim.infinite_information = true;
            continue;
        }

        const C2 cinv{cplx(cri / det, 0.0), -g / det, -std::conj(g) / det,
                      cplx(crn / det, 0.0)};
        // k1-phase-free kernels of the three distinct derivative matrices.
        const C2 e_k1{cplx(a + asq * b, 0.0), alpha * (a + b), std::conj(alpha) * (a + b),
                      cplx(asq * a + b, 0.0)};
        const C2 f_alpha{std::conj(alpha) * b, cplx(a + b, 0.0), cplx(0.0, 0.0),
                         std::conj(alpha) * a};
        const C2 f_alpha_conj{alpha * b, cplx(0.0, 0.0), cplx(a + b, 0.0), alpha * a};

        const C2 p_e = cinv * e_k1;
        const C2 p_a = cinv * f_alpha;
        const C2 p_ac = cinv * f_alpha_conj;

        // d/dk1 = conj(k1) e_k1, d/dconj(k1) = k1 e_k1, d/dalpha = |k1|^2
        // f_alpha, d/dconj(alpha) = |k1|^2 f_alpha_conj.
        j11 += k1_sq * tr2(p_e, p_e);
        j12 += std::conj(k1) * k1_sq * tr2(p_e, p_ac);
        j21 += k1 * k1_sq * tr2(p_a, p_e);
        j22 += k1_sq * k1_sq * tr2(p_a, p_ac);
    }

    const double scale = static_cast<double>(n_ofdm) / 2.0;
    fim.j11 = real_checked(scale * j11, "j11");
    fim.j12 = scale * j12;
    fim.j22 = real_checked(scale * j22, "j22");
    check_hermitian(fim.j12, scale * j21, fim.j11, fim.j22, "fim_fast");
    return fim;
}

CrlbResult crlb_alpha(const Fim2x2& fim) {
    CrlbResult res;
    res.fim = fim;
    if (fim.infinite_information) {
        res.var_alpha = 0.0;
        res.zero_bound = true;
        return res;
    }
    if (fim.j11 < 0.0 || fim.j22 < 0.0) {
        throw std::runtime_error("crlb_alpha: negative diagonal information");
    }
    const double cross = std::norm(fim.j12);
    if (cross > fim.j11 * fim.j22 * (1.0 + 1e-10)) {
        throw std::runtime_error("crlb_alpha: |j12|^2 exceeds j11 * j22");
    }
    if (fim.j11 == 0.0 && cross == 0.0) {
        res.var_alpha = fim.j22 > 0.0 ? 1.0 / fim.j22 : std::numeric_limits<double>::infinity();
        return res;
    }
    const double det = fim.j11 * fim.j22 - cross;
    if (det <= 0.0) {
        res.var_alpha = std::numeric_limits<double>::infinity();
        return res;
    }
    res.var_alpha = fim.j11 / det;
    return res;
}

CrlbResult crlb_simplified(const SpectralCovariances& spectral, std::size_t n_ofdm) {
    if (n_ofdm < 1) {
        throw std::invalid_argument("crlb_simplified: n_ofdm must be at least 1");
    }
    const std::size_t n = spectral.sigma_s_f_sq.size();
    const double eta_r = spectral.sigma_eta_r_sq;

    // Operating point |k1| = 1, alpha = 0: the pseudo-covariance vanishes and
    // the received spectra reduce to signal-plus-noise per bin.
    double sum = 0.0;
    double sum_j11 = 0.0;
    bool infinite = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = spectral.sigma_s_f_sq[k];
        const double b = spectral.sigma_s_f_img_sq[k];
        const double num = (a + b) * (a + b);
        if (num == 0.0) {
            continue;
        }
        const double ra = a + eta_r;
        const double rb = b + eta_r;
        if (ra * rb == 0.0) {
            infinite = true; // spectral content observed without any noise
            continue;
        }
        sum += num / (ra * rb);
        sum_j11 += (a / ra) * (a / ra) + (b / rb) * (b / rb);
    }

    CrlbResult res;
    res.fim.path = BoundPath::simplified;
    res.fim.j11 = static_cast<double>(n_ofdm) / 2.0 * sum_j11;
    res.fim.j12 = cplx(0.0, 0.0);
    res.fim.j22 = static_cast<double>(n_ofdm) / 2.0 * sum;
    if (infinite) {
        res.fim.infinite_information = true;
        res.var_alpha = 0.0;
        res.zero_bound = true;
        return res;
    }
    res.var_alpha = sum > 0.0 ? 2.0 / (static_cast<double>(n_ofdm) * sum)
                              : std::numeric_limits<double>::infinity();
    return res;
}

double crlb_symmetric_closed(std::size_t l_s, std::size_t n_dft, std::size_t n_ofdm,
                             double xi_r) {
    if (l_s < 1 || n_dft < 1 || n_ofdm < 1 || !(xi_r > 0.0)) {
        throw std::invalid_argument("crlb_symmetric_closed: invalid parameters");
    }
    const double base = 1.0 / (2.0 * static_cast<double>(l_s) * static_cast<double>(n_ofdm));
    if (std::isinf(xi_r)) {
        return base;
    }
    const double load =
        1.0 + (1.0 / xi_r) * static_cast<double>(l_s) / static_cast<double>(n_dft);
    return base * load * load;
}

double crlb_asymmetric_closed(std::size_t l_s, std::size_t n_dft, std::size_t n_ofdm,
                              double xi_r) {
    if (l_s < 1 || n_dft < 1 || n_ofdm < 1 || !(xi_r > 0.0)) {
        throw std::invalid_argument("crlb_asymmetric_closed: invalid parameters");
    }
    if (std::isinf(xi_r)) {
        return 0.0;
    }
    const double inv = 1.0 / xi_r;
    const double load = 1.0 + inv * static_cast<double>(l_s) / static_cast<double>(n_dft);
    return inv / (static_cast<double>(n_ofdm) * static_cast<double>(n_dft)) * load;
}

double post_imbalance_snr(double sigma_d_sq, std::size_t n_dft, const ImbalanceParams& params,
                          double sigma_eta_r_sq) {
    const double signal = sigma_d_sq / static_cast<double>(n_dft) * std::norm(params.k1) *
                          (1.0 + std::norm(params.alpha));
    if (sigma_eta_r_sq <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return signal / sigma_eta_r_sq;
}

} // namespace iqb
