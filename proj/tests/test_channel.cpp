#include <doctest.h>

#include "iqbound/channel.hpp"
#include "iqbound/fft.hpp"

using namespace iqb;

TEST_SUITE_BEGIN("channel");

namespace {

TimeDomainFrame make_frame(const cvec& samples, std::size_t n_dft, std::size_t l_cp,
                           std::size_t n_ofdm) {
    TimeDomainFrame f;
    f.config = OfdmConfig{n_dft, l_cp, n_ofdm, 1.0};
    f.samples = samples;
    return f;
}

} // namespace

TEST_CASE("realize_tdl: deterministic and statistical tap properties") {
    SUBCASE("single fixed tap is the flat channel") {
        DelayProfile p{"flat", {{0.0, 0.0, Fading::fixed}}};
        RandomStream rng(1);
        const ChannelRealization ch = realize_tdl(p, 1e6, rng);
        REQUIRE(ch.taps.size() == 1);
        CHECK(std::abs(ch.taps[0] - cplx(1.0, 0.0)) < 1e-15);
    }

    SUBCASE("fixed taps carry their nominal power exactly") {
        DelayProfile p{"two", {{0.0, 0.0, Fading::fixed}, {1000.0, 0.0, Fading::fixed}}};
        RandomStream rng(2);
        const ChannelRealization ch = realize_tdl(p, 1e6, rng);
        REQUIRE(ch.taps.size() == 2);
        CHECK(std::norm(ch.taps[0]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::norm(ch.taps[1]) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("rayleigh taps have the profile mean power") {
        DelayProfile p{"ray", {{0.0, -3.0, Fading::rayleigh}, {1000.0, -6.0, Fading::rayleigh}}};
        RandomStream rng(3);
        const std::size_t draws = 50000;
        double p0 = 0.0, p1 = 0.0;
        for (std::size_t i = 0; i < draws; ++i) {
            const ChannelRealization ch = realize_tdl(p, 1e6, rng);
            p0 += std::norm(ch.taps[0]);
            p1 += std::norm(ch.taps[1]);
        }
        p0 /= static_cast<double>(draws);
        p1 /= static_cast<double>(draws);
        CHECK(p0 == doctest::Approx(from_db(-3.0)).epsilon(0.03));
        CHECK(p1 == doctest::Approx(from_db(-6.0)).epsilon(0.03));
    }

    SUBCASE("coinciding taps are summed") {
        DelayProfile p{"merge", {{0.0, 0.0, Fading::fixed}, {10.0, 0.0, Fading::fixed}}};
        RandomStream rng(4);
        // At 1 MHz both delays round to sample 0.
        const ChannelRealization ch = realize_tdl(p, 1e6, rng);
        REQUIRE(ch.taps.size() == 1);
        CHECK(std::abs(ch.taps[0] - cplx(2.0, 0.0)) < 1e-12);
    }

    SUBCASE("tdlb100 at the 4096-point NR rate stays inside a normal CP") {
        const DelayProfile p = load_delay_profile(std::string(IQBOUND_DATA_DIR) + "/tdlb100.txt");
        REQUIRE(p.taps.size() == 12);
        RandomStream rng(5);
        const double fs = 122.88e6;
        const ChannelRealization ch = realize_tdl(p, fs, rng);
        // longest delay 480 ns -> round(480e-9 * 122.88e6) = 59
        CHECK(ch.taps.size() == 60);
        CHECK(ch.taps.size() < 288); // CP length of the matching numerology
    }
}

TEST_CASE("load_delay_profile: error paths") {
    CHECK_THROWS(load_delay_profile("/nonexistent/profile.txt"));
    DelayProfile bad{"bad", {{5.0, 0.0, Fading::fixed}, {5.0, 0.0, Fading::fixed}}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("exponential_profile: normalized fallback") {
    const DelayProfile p = exponential_profile(4, 100.0, 150.0);
    REQUIRE(p.taps.size() == 4);
    double total = 0.0;
    for (const auto& t : p.taps) {
        total += from_db(t.power_db);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.taps[1].power_db < p.taps[0].power_db);
}

TEST_CASE("normalize_power") {
    auto alloc_full = AllocationPattern::from_mask(std::vector<std::uint8_t>(16, 1));

    SUBCASE("scalar channel normalizes to unit gain") {
        ChannelRealization ch{{cplx(2.0, 0.0)}, 1.0};
        const ChannelRealization out = normalize_power(ch, alloc_full);
        CHECK(std::abs(out.taps[0] - cplx(1.0, 0.0)) < 1e-12);
    }

    SUBCASE("two equal taps scale by 1/sqrt(2) under full allocation") {
        ChannelRealization ch{{cplx(1.0, 0.0), cplx(1.0, 0.0)}, 1.0};
        const ChannelRealization out = normalize_power(ch, alloc_full);
        CHECK(std::abs(out.taps[0] - cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    }

    SUBCASE("post-condition and idempotence on random channels") {
        RandomStream rng(7);
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t n = 32;
            std::vector<std::uint8_t> mask(n);
            std::size_t active = 0;
            for (auto& b : mask) {
                b = rng.uniform() < 0.4 ? 1 : 0;
                active += b;
            }
            if (active == 0) {
                mask[3] = 1;
            }
            auto alloc = AllocationPattern::from_mask(mask);
            cvec taps(3);
            for (auto& t : taps) {
                t = rng.circular_gaussian(1.0);
            }
            taps[0] += cplx(1.0, 0.0);
            const ChannelRealization out = normalize_power(ChannelRealization{taps, 1.0}, alloc);
            const FrequencyResponse fr = frequency_response(out, n);
            double weighted = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (alloc.mask[k]) {
                    weighted += std::norm(fr.h_f[k]);
                }
            }
            CHECK(weighted == doctest::Approx(static_cast<double>(alloc.l_s)).epsilon(1e-12));

            const ChannelRealization twice = normalize_power(out, alloc);
            for (std::size_t q = 0; q < taps.size(); ++q) {
                CHECK(std::abs(twice.taps[q] - out.taps[q]) < 1e-12);
            }
        }
    }

    SUBCASE("all-zero channel rejected") {
        ChannelRealization ch{{cplx(0.0, 0.0)}, 1.0};
        CHECK_THROWS_AS(normalize_power(ch, alloc_full), std::invalid_argument);
    }
}

TEST_CASE("apply_linear") {
    SUBCASE("identity and pure delay") {
        cvec x{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
        const TimeDomainFrame f = make_frame(x, 4, 0, 1);
        const TimeDomainFrame id = apply_linear(ChannelRealization{{cplx(1, 0)}, 1.0}, f);
        CHECK(id.samples == x);

        const TimeDomainFrame delayed =
            apply_linear(ChannelRealization{{cplx(0, 0), cplx(1, 0)}, 1.0}, f);
        CHECK(std::abs(delayed.samples[0]) == 0.0);
        for (std::size_t i = 1; i < 4; ++i) {
            CHECK(delayed.samples[i] == x[i - 1]);
        }
    }

    SUBCASE("matches an explicit Toeplitz matrix product") {
        RandomStream rng(9);
        const std::size_t n = 32;
        cvec x(n), taps(3);
        for (auto& v : x) {
            v = rng.circular_gaussian(1.0);
        }
        for (auto& t : taps) {
            t = rng.circular_gaussian(1.0);
        }
        const TimeDomainFrame out =
            apply_linear(ChannelRealization{taps, 1.0}, make_frame(x, 8, 4, 4));
        for (std::size_t row = 0; row < n; ++row) {
            cplx expect(0, 0);
            for (std::size_t q = 0; q < 3 && q <= row; ++q) {
                expect += taps[q] * x[row - q];
            }
            CHECK(std::abs(out.samples[row] - expect) < 1e-12);
        }
    }

    SUBCASE("channel memory beyond the CP rejected") {
        cvec x(12, cplx(1, 0));
        const TimeDomainFrame f = make_frame(x, 8, 4, 1);
        cvec taps(6, cplx(0.1, 0.0));
        CHECK_THROWS_AS(apply_linear(ChannelRealization{taps, 1.0}, f), std::invalid_argument);
    }
}

TEST_CASE("frequency_response") {
    SUBCASE("flat channel gives all-ones") {
        const FrequencyResponse fr = frequency_response(cvec{cplx(1.0, 0.0)}, 8);
        for (const cplx& v : fr.h_f) {
            CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-12);
        }
    }

    SUBCASE("shifted delta gives a pure phase ramp") {
        const FrequencyResponse fr = frequency_response(cvec{cplx(0, 0), cplx(1, 0)}, 4);
        for (std::size_t k = 0; k < 4; ++k) {
            const double ang = -2.0 * pi * static_cast<double>(k) / 4.0;
            CHECK(std::abs(fr.h_f[k] - cplx(std::cos(ang), std::sin(ang))) < 1e-12);
        }
    }

    SUBCASE("diagonalizes the circular channel matrix") {
        RandomStream rng(13);
        const std::size_t n = 16;
        cvec taps(4);
        for (auto& t : taps) {
            t = rng.circular_gaussian(1.0);
        }
        const FrequencyResponse fr = frequency_response(taps, n);
        // columns of the circular matrix: delta at each position convolved
        for (std::size_t col = 0; col < n; ++col) {
            cvec column(n, cplx(0, 0));
            for (std::size_t q = 0; q < taps.size(); ++q) {
                column[(col + q) % n] += taps[q];
            }
            // F * H' * F^H applied to basis vector e_col:
            cvec lhs = fft_unitary_copy(column);
            cvec e(n, cplx(0, 0));
            e[col] = cplx(1.0, 0.0);
            cvec rhs = fft_unitary_copy(e);
            for (std::size_t k = 0; k < n; ++k) {
                rhs[k] *= fr.h_f[k];
            }
            for (std::size_t k = 0; k < n; ++k) {
                CHECK(std::abs(lhs[k] - rhs[k]) < 1e-10);
            }
        }
    }

    SUBCASE("circularization: CP-removed linear output equals circular convolution") {
        RandomStream rng(15);
        const std::size_t n_dft = 16, l_cp = 5, n_ofdm = 3;
        cvec taps(4);
        for (auto& t : taps) {
            t = rng.circular_gaussian(1.0);
        }
        cvec samples((n_dft + l_cp) * n_ofdm);
        // CP-consistent frame: tail copied in front of each symbol
        for (std::size_t s = 0; s < n_ofdm; ++s) {
            cvec body(n_dft);
            for (auto& v : body) {
                v = rng.circular_gaussian(1.0);
            }
            for (std::size_t i = 0; i < l_cp; ++i) {
                samples[s * (n_dft + l_cp) + i] = body[n_dft - l_cp + i];
            }
            for (std::size_t i = 0; i < n_dft; ++i) {
                samples[s * (n_dft + l_cp) + l_cp + i] = body[i];
            }
        }
        const TimeDomainFrame out =
            apply_linear(ChannelRealization{taps, 1.0}, make_frame(samples, n_dft, l_cp, n_ofdm));
        for (std::size_t s = 0; s < n_ofdm; ++s) {
            const std::size_t base = s * (n_dft + l_cp) + l_cp;
            for (std::size_t i = 0; i < n_dft; ++i) {
                cplx circ(0, 0);
                for (std::size_t q = 0; q < taps.size(); ++q) {
                    circ += taps[q] * samples[base + ((i + n_dft - q) % n_dft)];
                }
                CHECK(std::abs(out.samples[base + i] - circ) < 1e-12);
            }
        }
    }
}

TEST_SUITE_END();
