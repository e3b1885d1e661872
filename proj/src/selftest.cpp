#include "iqbound/selftest.hpp"

#include <algorithm>
#include <sstream>

#include "iqbound/crlb.hpp"
#include "iqbound/impairment.hpp"

namespace iqb {

namespace {

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

double rel_err(cplx a, cplx b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

} // namespace

ModelSpec random_model(RandomStream& rng, const RandomModelOptions& options) {
    ModelSpec model;
    const std::size_t n_dft =
        options.n_dft_choices[rng.uniform_int(options.n_dft_choices.size())];
    model.config.n_dft = n_dft;
    model.config.l_cp = options.with_cp ? n_dft / 4 : 0;
    model.config.n_ofdm = 1 + rng.uniform_int(options.max_n_ofdm);
    model.config.sigma_d_sq = 0.5 + 1.5 * rng.uniform();

    std::vector<std::uint8_t> mask(n_dft, 0);
    const double density = 0.2 + 0.6 * rng.uniform();
    std::size_t active = 0;
    for (std::size_t k = 0; k < n_dft; ++k) {
        mask[k] = rng.uniform() < density ? 1 : 0;
        active += mask[k];
    }
    if (active == 0) {
        mask[1 + rng.uniform_int(n_dft - 1)] = 1;
    }
    model.alloc = AllocationPattern::from_mask(std::move(mask));

    const std::size_t q = 1 + rng.uniform_int(std::min(options.max_taps, n_dft));
    model.channel_taps.assign(q, cplx(0.0, 0.0));
    model.channel_taps[0] = cplx(1.0, 0.0); // keep the channel away from zero
    for (std::size_t i = 0; i < q; ++i) {
        model.channel_taps[i] += rng.circular_gaussian(0.5);
    }

    const double signal = model.config.sigma_d_sq / static_cast<double>(n_dft);
    model.noise.sigma_eta_s_sq =
        signal * (options.noise_s_rel_min +
                  (options.noise_s_rel_max - options.noise_s_rel_min) * rng.uniform());
    model.noise.sigma_eta_r_sq =
        signal * (options.noise_r_rel_min +
                  (options.noise_r_rel_max - options.noise_r_rel_min) * rng.uniform());

    const double ilr = options.min_ilr_db + (options.max_ilr_db - options.min_ilr_db) * rng.uniform();
    model.params = from_target_ilr(ilr, rng);
    return model;
}

SelfTestReport selftest_oracle_equivalence(unsigned n_models, double tol_rel,
                                           std::uint64_t seed) {
    SelfTestReport rep;
    RandomStream rng(seed);
    double worst = 0.0;
    for (unsigned m = 0; m < n_models; ++m) {
        const ModelSpec model = random_model(rng);
        const Fim2x2 dense = fim_full(model);
        const Fim2x2 fast = fim_fast(spectral_covariances(model), model.config.n_ofdm);
        const double err = std::max({rel_err(dense.j11, fast.j11), rel_err(dense.j12, fast.j12),
                                     rel_err(dense.j22, fast.j22),
                                     rel_err(crlb_alpha(dense).var_alpha,
                                             crlb_alpha(fast).var_alpha)});
        worst = std::max(worst, err);
        if (err > tol_rel) {
            rep.passed = false;
            std::ostringstream os;
            os << "oracle-equivalence: model " << m << " (n_dft=" << model.config.n_dft
               << ") relative error " << fmt(err) << " exceeds " << fmt(tol_rel);
            rep.lines.push_back(os.str());
        }
    }
    std::ostringstream os;
    os << "oracle-equivalence: " << n_models << " models, max relative error " << fmt(worst)
       << " (tolerance " << fmt(tol_rel) << ")";
    rep.lines.push_back(os.str());
    return rep;
}

SelfTestReport selftest_closed_form_identities(unsigned n_draws, double tol_rel,
                                               double sigma_r_perturb, std::uint64_t seed) {
    SelfTestReport rep;
    RandomStream rng(seed);
    const std::vector<std::size_t> sizes{16, 32, 64, 128};
    double worst = 0.0;

    for (unsigned d = 0; d < n_draws; ++d) {
        const std::size_t n_dft = sizes[rng.uniform_int(sizes.size())];
        const std::size_t n_ofdm = 1 + rng.uniform_int(12);
        const double sigma_d_sq = 0.5 + 1.5 * rng.uniform();
        const bool zero_noise = rng.uniform() < 0.25;
        const double sigma_eta_r_sq =
            zero_noise ? 0.0 : sigma_d_sq / static_cast<double>(n_dft) * from_db(-40.0 + 50.0 * rng.uniform());

        ModelSpec model;
        model.config = OfdmConfig{n_dft, 0, n_ofdm, sigma_d_sq};
        model.channel_taps = {cplx(1.0, 0.0)};
        model.noise = NoiseSpec{0.0, sigma_eta_r_sq};
        model.params = from_target_ilr(-25.0, rng);

        const double xi_r =
            sigma_eta_r_sq > 0.0
                ? (1.0 + sigma_r_perturb) * sigma_d_sq /
                      (static_cast<double>(n_dft) * sigma_eta_r_sq)
                : std::numeric_limits<double>::infinity();

        const bool symmetric = d % 2 == 0;
        double closed = 0.0;
        std::size_t l_s = 0;
        if (symmetric) {
            l_s = 2 * (1 + rng.uniform_int(n_dft / 2 - 1));
            model.alloc = make_allocation(AllocationKind::symmetric_dc, l_s, n_dft);
            closed = crlb_symmetric_closed(l_s, n_dft, n_ofdm, xi_r);
        } else {
            l_s = 1 + rng.uniform_int(n_dft / 2 - 1);
            model.alloc = make_allocation(AllocationKind::contiguous_low, l_s, n_dft);
            closed = crlb_asymmetric_closed(l_s, n_dft, n_ofdm, xi_r);
        }

        const CrlbResult simplified = crlb_simplified(spectral_covariances(model), n_ofdm);
        const double err = rel_err(closed, simplified.var_alpha);
        worst = std::max(worst, err);
        if (err > tol_rel) {
            rep.passed = false;
            std::ostringstream os;
            os << "closed-form identity: draw " << d << " (" << (symmetric ? "symmetric" : "asymmetric")
               << ", n_dft=" << n_dft << ", l_s=" << l_s << ") relative error " << fmt(err)
               << " exceeds " << fmt(tol_rel);
            rep.lines.push_back(os.str());
        }
        if (symmetric && std::isinf(xi_r)) {
            const double exact = 1.0 / (2.0 * static_cast<double>(l_s) * static_cast<double>(n_ofdm));
            if (crlb_symmetric_closed(l_s, n_dft, n_ofdm, xi_r) != exact) {
                rep.passed = false;
                rep.lines.push_back("closed-form identity: zero-noise symmetric value not exact");
            }
        }
    }
    std::ostringstream os;
    os << "closed-form identities: " << n_draws << " draws, max relative error " << fmt(worst)
       << " (tolerance " << fmt(tol_rel) << ")";
    rep.lines.push_back(os.str());
    return rep;
}

} // namespace iqb
