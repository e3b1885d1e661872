#include "iqbound/waveform.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "iqbound/fft.hpp"

namespace iqb {

namespace {

unsigned gray_to_binary(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) {
        b ^= g;
    }
    return b;
}

bool supported_order(unsigned m) {
    switch (m) {
    case 4:
    case 16:
    case 64:
    case 256:
    case 1024:
        return true;
    default:
        return false;
    }
}

} // namespace

ModulationAlphabet qam_alphabet(unsigned order) {
    if (!supported_order(order)) {
        throw std::invalid_argument("qam_alphabet: order must be one of 4, 16, 64, 256, 1024");
    }
    unsigned side = 1;
    while (side * side < order) {
        side <<= 1;
    }
    const unsigned bits_per_axis = std::countr_zero(side);
    // Unit average power: E[I^2 + Q^2] = 2 (side^2 - 1) / 3 before scaling.
    const double scale = std::sqrt(3.0 / (2.0 * (static_cast<double>(order) - 1.0)));

    ModulationAlphabet a;
    a.order = order;
    a.points.reserve(order);
    for (unsigned idx = 0; idx < order; ++idx) {
        // Reflected-binary Gray labeling per axis; fixed for reproducibility.
        const unsigned gi = idx >> bits_per_axis;
        const unsigned gq = idx & (side - 1);
        const double amp_i = 2.0 * static_cast<double>(gray_to_binary(gi)) - (side - 1.0);
        const double amp_q = 2.0 * static_cast<double>(gray_to_binary(gq)) - (side - 1.0);
        a.points.emplace_back(amp_i * scale, amp_q * scale);
    }
    return a;
}

AllocationPattern AllocationPattern::from_mask(std::vector<std::uint8_t> mask) {
    if (mask.empty()) {
        throw std::invalid_argument("AllocationPattern: empty mask");
    }
    AllocationPattern p;
    p.n_dft = mask.size();
    p.mask = std::move(mask);
    p.sym_mask.resize(p.n_dft);
    p.asym_mask.resize(p.n_dft);
    for (std::size_t k = 0; k < p.n_dft; ++k) {
        const std::uint8_t active = p.mask[k] ? 1 : 0;
        const std::uint8_t image = p.mask[mirror_index(k, p.n_dft)] ? 1 : 0;
        p.sym_mask[k] = static_cast<std::uint8_t>(active & image);
        p.asym_mask[k] = static_cast<std::uint8_t>(active & (1 - image));
        p.l_s += active;
    }
    return p;
}

AllocationPattern::Kind AllocationPattern::classify() const {
    const bool any_sym = std::any_of(sym_mask.begin(), sym_mask.end(), [](auto v) { return v != 0; });
    const bool any_asym =
        std::any_of(asym_mask.begin(), asym_mask.end(), [](auto v) { return v != 0; });
    if (any_sym && any_asym) {
        return Kind::mixed;
    }
    return any_sym ? Kind::symmetric : Kind::asymmetric;
}

AllocationPattern make_allocation(AllocationKind kind, std::size_t l_s, std::size_t n_dft) {
    if (n_dft == 0) {
        throw std::invalid_argument("make_allocation: n_dft must be positive");
    }
    std::vector<std::uint8_t> mask(n_dft, 0);
    switch (kind) {
    case AllocationKind::contiguous_low:
        if (l_s < 1 || l_s > n_dft - 1) {
            throw std::invalid_argument("make_allocation: contiguous_low needs 1 <= l_s <= n_dft - 1");
        }
        for (std::size_t k = 1; k <= l_s; ++k) {
            mask[k] = 1;
        }
        break;
    case AllocationKind::symmetric_dc:
        if (l_s < 2 || l_s % 2 != 0 || l_s > n_dft - 2) {
            throw std::invalid_argument(
                "make_allocation: symmetric_dc needs even l_s with 2 <= l_s <= n_dft - 2");
        }
        for (std::size_t k = 1; k <= l_s / 2; ++k) {
            mask[k] = 1;
            mask[n_dft - k] = 1;
        }
        break;
    }
    return AllocationPattern::from_mask(std::move(mask));
}

void OfdmConfig::validate() const {
    if (n_dft == 0) {
        throw std::invalid_argument("OfdmConfig: n_dft must be positive");
    }
    if (l_cp >= n_dft) {
        throw std::invalid_argument("OfdmConfig: l_cp must be smaller than n_dft");
    }
    if (n_ofdm < 1) {
        throw std::invalid_argument("OfdmConfig: n_ofdm must be at least 1");
    }
    if (sigma_d_sq <= 0.0) {
        throw std::invalid_argument("OfdmConfig: sigma_d_sq must be positive");
    }
}

cvec draw_symbols(const AllocationPattern& alloc, const ModulationAlphabet& alphabet,
                  double sigma_d_sq, RandomStream& rng) {
    if (alloc.l_s == 0) {
        throw std::invalid_argument("draw_symbols: allocation has no active subcarriers");
    }
    const double amp = std::sqrt(sigma_d_sq / static_cast<double>(alloc.l_s));
    cvec d(alloc.n_dft, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < alloc.n_dft; ++k) {
        if (alloc.mask[k]) {
            d[k] = amp * alphabet.points[rng.uniform_int(alphabet.points.size())];
        }
    }
    return d;
}

cvec ofdm_modulate(std::span<const cplx> d, const OfdmConfig& config) {
    config.validate();
    if (d.size() != config.n_dft) {
        throw std::invalid_argument("ofdm_modulate: symbol length does not match n_dft");
    }
    cvec body = ifft_unitary_copy(d);
    cvec x;
    x.reserve(config.n_sym());
    x.insert(x.end(), body.end() - static_cast<std::ptrdiff_t>(config.l_cp), body.end());
    x.insert(x.end(), body.begin(), body.end());
    return x;
}

TimeDomainFrame generate_frame(const OfdmConfig& config, const AllocationPattern& alloc,
                               const ModulationAlphabet& alphabet, RandomStream& rng) {
    config.validate();
    if (alloc.n_dft != config.n_dft) {
        throw std::invalid_argument("generate_frame: allocation size does not match n_dft");
    }
    TimeDomainFrame frame;
    frame.config = config;
    frame.samples.reserve(config.total_samples());
    for (std::size_t n = 0; n < config.n_ofdm; ++n) {
        cvec d = draw_symbols(alloc, alphabet, config.sigma_d_sq, rng);
        cvec x = ofdm_modulate(d, config);
        frame.samples.insert(frame.samples.end(), x.begin(), x.end());
    }
    return frame;
}

double predicted_kurtosis(unsigned mod_order, std::size_t l_s) {
    if (l_s < 1) {
        throw std::invalid_argument("predicted_kurtosis: l_s must be at least 1");
    }
    const ModulationAlphabet a = qam_alphabet(mod_order);
    double m2 = 0.0;
    double m4 = 0.0;
    for (const cplx& p : a.points) {
        const double pw = std::norm(p);
        m2 += pw;
        m4 += pw * pw;
    }
    m2 /= static_cast<double>(a.points.size());
    m4 /= static_cast<double>(a.points.size());
    const double kappa4 = m4 / (m2 * m2) - 2.0;
    return kappa4 / static_cast<double>(l_s);
}

double empirical_kurtosis(std::span<const cplx> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical_kurtosis: empty input");
    }
    double m2 = 0.0;
    double m4 = 0.0;
    for (const cplx& v : samples) {
        const double pw = std::norm(v);
        m2 += pw;
        m4 += pw * pw;
    }
    m2 /= static_cast<double>(samples.size());
    m4 /= static_cast<double>(samples.size());
    return m4 / (m2 * m2) - 2.0;
}

} // namespace iqb
