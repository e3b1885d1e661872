#include <doctest.h>

#include "iqbound/crlb.hpp"
#include "iqbound/selftest.hpp"

using namespace iqb;

TEST_SUITE_BEGIN("crlb");

namespace {

double rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

ModelSpec flat_model(std::size_t n_dft, std::size_t n_ofdm, const AllocationPattern& alloc,
                     double eta_s, double eta_r, const ImbalanceParams& params) {
    ModelSpec m;
    m.config = OfdmConfig{n_dft, 0, n_ofdm, 1.0};
    m.alloc = alloc;
    m.noise = NoiseSpec{eta_s, eta_r};
    m.params = params;
    return m;
}

} // namespace

TEST_CASE("fim_full: structural checks") {
    RandomStream rng(61);

    SUBCASE("near-zero imbalance decouples the parameters") {
        ModelSpec m = flat_model(16, 2, make_allocation(AllocationKind::contiguous_low, 9, 16),
                                 0.0, 1e-3, from_gain_phase(1e-6, 0.0));
        const Fim2x2 fim = fim_full(m);
        CHECK(std::abs(fim.j12) / std::sqrt(fim.j11 * fim.j22) < 1e-3);
    }

    SUBCASE("doubling n_ofdm doubles every entry") {
        RandomModelOptions opt;
        opt.n_dft_choices = {16};
        for (int rep = 0; rep < 5; ++rep) {
            ModelSpec m = random_model(rng, opt);
            m.config.n_ofdm = 1;
            const Fim2x2 one = fim_full(m);
            m.config.n_ofdm = 2;
            const Fim2x2 two = fim_full(m);
            CHECK(rel(two.j11, 2.0 * one.j11) < 1e-8);
            CHECK(rel(two.j22, 2.0 * one.j22) < 1e-8);
            CHECK(std::abs(two.j12 - 2.0 * one.j12) < 1e-8 * std::abs(one.j12));
        }
    }

    SUBCASE("symmetric full allocation, zero noise matches 1/(2 n_dft n_ofdm)") {
        for (std::size_t n_ofdm : {1ul, 3ul}) {
            RandomStream r2(62);
            ModelSpec m = flat_model(
                16, n_ofdm, AllocationPattern::from_mask(std::vector<std::uint8_t>(16, 1)), 0.0,
                0.0, from_target_ilr(-40.0, r2));
            const CrlbResult res = crlb_alpha(fim_full(m));
            const double expected = 1.0 / (2.0 * 16.0 * static_cast<double>(n_ofdm));
            CHECK(rel(res.var_alpha, expected) < 0.01);
        }
    }

    SUBCASE("noiseless asymmetric content is flagged as a zero bound") {
        ModelSpec m = flat_model(16, 1, make_allocation(AllocationKind::contiguous_low, 5, 16),
                                 0.0, 0.0, from_gain_phase(0.1, 0.0));
        const Fim2x2 fim = fim_full(m);
        CHECK(fim.infinite_information);
        const CrlbResult res = crlb_alpha(fim);
        CHECK(res.var_alpha == 0.0);
        CHECK(res.zero_bound);
    }
}

TEST_CASE("fim_fast: oracle equivalence against the dense path") {
    // Entrywise agreement within 1e-8 relative over random CP-free models.
    const SelfTestReport rep = selftest_oracle_equivalence(60, 1e-8, 424242);
    for (const auto& line : rep.lines) {
        INFO(line);
    }
    CHECK(rep.passed);
}

TEST_CASE("fim_fast: flagged zero bound on noiseless asymmetric models") {
    RandomStream rng(67);
    ModelSpec m = flat_model(32, 2, make_allocation(AllocationKind::contiguous_low, 9, 32), 0.0,
                             0.0, from_target_ilr(-20.0, rng));
    const Fim2x2 fim = fim_fast(spectral_covariances(m), m.config.n_ofdm);
    CHECK(fim.infinite_information);
    CHECK(crlb_alpha(fim).var_alpha == 0.0);
}

TEST_CASE("crlb_alpha") {
    SUBCASE("diagonal information inverts directly") {
        Fim2x2 fim;
        fim.j11 = 5.0;
        fim.j22 = 4.0;
        fim.j12 = cplx(0.0, 0.0);
        CHECK(crlb_alpha(fim).var_alpha == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("textbook 2x2 inverse") {
        Fim2x2 fim;
        fim.j11 = 2.0;
        fim.j22 = 2.0;
        fim.j12 = cplx(1.0, 0.0);
        CHECK(crlb_alpha(fim).var_alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("matches an explicit inverse on random PSD matrices") {
        RandomStream rng(71);
        for (int rep = 0; rep < 100; ++rep) {
            // Build J = A A^H to guarantee positive semidefiniteness.
            const cplx a(rng.gaussian(), rng.gaussian());
            const cplx b(rng.gaussian(), rng.gaussian());
            const cplx c(rng.gaussian(), rng.gaussian());
            const cplx d(rng.gaussian(), rng.gaussian());
            Fim2x2 fim;
            fim.j11 = std::norm(a) + std::norm(b);
            fim.j22 = std::norm(c) + std::norm(d);
            fim.j12 = a * std::conj(c) + b * std::conj(d);
            const double det = fim.j11 * fim.j22 - std::norm(fim.j12);
            if (det < 1e-6) {
                continue;
            }
            CHECK(rel(crlb_alpha(fim).var_alpha, fim.j11 / det) < 1e-12);
        }
    }
    SUBCASE("inconsistent information rejected") {
        Fim2x2 fim;
        fim.j11 = 1.0;
        fim.j22 = 1.0;
        fim.j12 = cplx(2.0, 0.0);
        CHECK_THROWS_AS(crlb_alpha(fim), std::runtime_error);
    }
}

TEST_CASE("crlb_simplified: approximation quality") {
    RandomStream rng(73);
    RandomModelOptions opt;
    opt.n_dft_choices = {16, 32};

    SUBCASE("within 0.1 dB of the exact bound at ILR -40 dB") {
        opt.min_ilr_db = -40.0;
        opt.max_ilr_db = -40.0;
        for (int rep = 0; rep < 40; ++rep) {
            const ModelSpec m = random_model(rng, opt);
            const SpectralCovariances sc = spectral_covariances(m);
            const double exact = crlb_alpha(fim_fast(sc, m.config.n_ofdm)).var_alpha;
            const double simple = crlb_simplified(sc, m.config.n_ofdm).var_alpha;
            CHECK(std::abs(to_db(exact) - to_db(simple)) < 0.1);
        }
    }
    SUBCASE("within 0.5 dB at ILR -15 dB") {
        opt.min_ilr_db = -15.0;
        opt.max_ilr_db = -15.0;
        for (int rep = 0; rep < 40; ++rep) {
            const ModelSpec m = random_model(rng, opt);
            const SpectralCovariances sc = spectral_covariances(m);
            const double exact = crlb_alpha(fim_fast(sc, m.config.n_ofdm)).var_alpha;
            const double simple = crlb_simplified(sc, m.config.n_ofdm).var_alpha;
            CHECK(std::abs(to_db(exact) - to_db(simple)) < 0.5);
        }
    }
    SUBCASE("symmetric flat noiseless case is exactly 1/(2 l_s n_ofdm)") {
        ModelSpec m = flat_model(64, 7, make_allocation(AllocationKind::symmetric_dc, 24, 64),
                                 0.0, 0.0, from_gain_phase(0.0, 0.0));
        const CrlbResult res = crlb_simplified(spectral_covariances(m), 7);
        CHECK(rel(res.var_alpha, 1.0 / (2.0 * 24.0 * 7.0)) < 1e-12);
    }
}

TEST_CASE("closed forms") {
    SUBCASE("paper-scale zero-noise symmetric value") {
        const double v = crlb_symmetric_closed(3300, 4096, 10, std::numeric_limits<double>::infinity());
        CHECK(v == 1.0 / 66000.0);
        CHECK(to_db(v) == doctest::Approx(-48.2).epsilon(0.001));
    }
    SUBCASE("asymmetric bound vanishes without noise and grows with l_s") {
        CHECK(crlb_asymmetric_closed(100, 4096, 10, std::numeric_limits<double>::infinity()) == 0.0);
        double prev = 0.0;
        for (std::size_t l_s : {1ul, 16ul, 256ul, 2047ul}) {
            const double v = crlb_asymmetric_closed(l_s, 4096, 10, 100.0);
            CHECK(v > prev);
            prev = v;
        }
    }
    SUBCASE("identities against the simplified bound") {
        const SelfTestReport rep = selftest_closed_form_identities(60, 1e-10, 0.0, 515151);
        for (const auto& line : rep.lines) {
            INFO(line);
        }
        CHECK(rep.passed);
    }
    SUBCASE("perturbing the SNR convention breaks the identity") {
        const SelfTestReport rep = selftest_closed_form_identities(60, 1e-10, 1e-6, 515151);
        CHECK_FALSE(rep.passed);
    }
}

TEST_CASE("bound invariants") {
    RandomStream rng(79);

    SUBCASE("CP influence vanishes without noise on symmetric signal-limited content") {
        // Flat channel, symmetric allocation, sigma_eta_s = 0: the bound is
        // signal-limited and the duplicated CP samples carry nothing new.
        for (std::size_t l_s : {12ul, 30ul}) {
            RandomStream r2(63);
            ModelSpec m = flat_model(32, 2, make_allocation(AllocationKind::symmetric_dc, l_s, 32),
                                     0.0, 1e-3 / 32.0, from_target_ilr(-25.0, r2));
            m.config.l_cp = 8;
            const double with_cp = crlb_alpha(fim_full(m, false)).var_alpha;
            m.config.l_cp = 0;
            const double without = crlb_alpha(fim_full(m, false)).var_alpha;
            CHECK(std::abs(to_db(with_cp) - to_db(without)) < 0.01);
        }
    }

    SUBCASE("CP negligibility in the signal-limited, low-noise-ratio regime") {
        // Symmetric allocations, flat channel, sigma_eta_s well below
        // sigma_eta_r, both well below the signal. Outside this regime the CP
        // carries real information (see the next subcase).
        for (int rep = 0; rep < 10; ++rep) {
            const std::size_t l_s = 8 + 2 * rng.uniform_int(12);
            ModelSpec m;
            m.config = OfdmConfig{32, 8, 1 + rng.uniform_int(2), 0.5 + 1.5 * rng.uniform()};
            m.alloc = make_allocation(AllocationKind::symmetric_dc, l_s, 32);
            const double signal = m.config.sigma_d_sq / 32.0;
            const double eta_r = signal * (1e-3 + 1.9e-2 * rng.uniform());
            m.noise = NoiseSpec{eta_r * (0.01 + 0.09 * rng.uniform()), eta_r};
            m.params = from_target_ilr(-60.0 + 40.0 * rng.uniform(), rng);
            const double with_cp = crlb_alpha(fim_full(m, false)).var_alpha;
            ModelSpec no_cp = m;
            no_cp.config.l_cp = 0;
            const double without = crlb_alpha(fim_full(no_cp, false)).var_alpha;
            CHECK(std::abs(to_db(with_cp) - to_db(without)) < 0.1);
        }
    }

    SUBCASE("CP samples add the sample-count factor on noise-limited content") {
        // Asymmetric allocation with only post-imbalance noise: the bound is
        // noise-limited, so observing the duplicated CP samples averages that
        // noise and the information grows by about 1 + l_cp / n_dft.
        RandomStream r2(64);
        ModelSpec m = flat_model(32, 2, make_allocation(AllocationKind::contiguous_low, 10, 32),
                                 0.0, 1e-3 / 32.0, from_target_ilr(-25.0, r2));
        m.config.l_cp = 8;
        const double with_cp = crlb_alpha(fim_full(m, false)).var_alpha;
        m.config.l_cp = 0;
        const double without = crlb_alpha(fim_full(m, false)).var_alpha;
        const double delta = to_db(with_cp) - to_db(without);
        CHECK(delta < -0.8);
        CHECK(delta > -1.1); // -10 log10(1 + 8/32) = -0.97 dB
    }

    SUBCASE("variance decreases with n_ofdm") {
        RandomModelOptions opt;
        opt.n_dft_choices = {16};
        for (int rep = 0; rep < 10; ++rep) {
            ModelSpec m = random_model(rng, opt);
            const SpectralCovariances sc = spectral_covariances(m);
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t n_ofdm : {1ul, 2ul, 4ul, 16ul}) {
                const double v = crlb_alpha(fim_fast(sc, n_ofdm)).var_alpha;
                CHECK(v <= prev);
                prev = v;
            }
        }
    }

    SUBCASE("positivity") {
        for (int rep = 0; rep < 50; ++rep) {
            const ModelSpec m = random_model(rng);
            CHECK(crlb_alpha(fim_fast(spectral_covariances(m), m.config.n_ofdm)).var_alpha >= 0.0);
        }
    }

    SUBCASE("frequency selectivity helps on average (symmetric full allocation)") {
        auto full_alloc = AllocationPattern::from_mask(std::vector<std::uint8_t>(64, 1));
        RandomStream r2(83);
        const ImbalanceParams params = from_target_ilr(-20.0, r2);
        const double eta_s = 1e-2 / 64.0;
        const double eta_r = 1e-3 / 64.0;
        ModelSpec flat = flat_model(64, 2, full_alloc, eta_s, eta_r, params);
        const double flat_bound =
            crlb_alpha(fim_fast(spectral_covariances(flat), 2)).var_alpha;

        double mean_selective = 0.0;
        const int draws = 120;
        for (int i = 0; i < draws; ++i) {
            cvec taps{r2.circular_gaussian(0.5), r2.circular_gaussian(0.5)};
            taps[0] += cplx(1.0, 0.0);
            ChannelRealization ch{taps, 1.0};
            ch = normalize_power(ch, full_alloc);
            ModelSpec sel = flat;
            sel.channel_taps = ch.taps;
            mean_selective += crlb_alpha(fim_fast(spectral_covariances(sel), 2)).var_alpha;
        }
        mean_selective /= draws;
        CHECK(mean_selective < flat_bound);
    }
}

TEST_CASE("post_imbalance_snr convention") {
    RandomStream rng(89);
    const ImbalanceParams p = from_target_ilr(-20.0, rng);
    const double xi = post_imbalance_snr(1.0, 4096, p, 1e-3);
    // |k1| = 1 by construction, so signal power is (1 + |alpha|^2)/4096.
    CHECK(xi == doctest::Approx((1.0 + 0.01) / 4096.0 / 1e-3).epsilon(1e-12));
    CHECK(std::isinf(post_imbalance_snr(1.0, 64, p, 0.0)));
}

TEST_SUITE_END();
