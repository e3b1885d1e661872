#include "iqbound/estimators.hpp"

#include <algorithm>
#include <stdexcept>

#include "iqbound/fft.hpp"

namespace iqb {

EstimationReport mbe_estimate(std::span<const cplx> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("mbe_estimate: need at least 2 samples");
    }
    cplx c2(0.0, 0.0);
    double p = 0.0;
    for (const cplx& r : samples) {
        c2 += r * r;
        p += std::norm(r);
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    c2 *= inv_n;
    p *= inv_n;
    if (p == 0.0) {
        throw std::invalid_argument("mbe_estimate: all-zero input");
    }
    const double disc = std::max(p * p - std::norm(c2), 0.0);
    EstimationReport rep;
    rep.alpha_hat = c2 / (p + std::sqrt(disc));
    rep.n_samples_used = samples.size();
    return rep;
}

PrefilterResult prefilter_symmetric(const TimeDomainFrame& frame,
                                    const AllocationPattern& alloc) {
    const OfdmConfig& cfg = frame.config;
    cfg.validate();
    if (alloc.n_dft != cfg.n_dft) {
        throw std::invalid_argument("prefilter_symmetric: allocation size does not match n_dft");
    }
    if (frame.samples.size() != cfg.total_samples()) {
        throw std::invalid_argument("prefilter_symmetric: frame length does not match config");
    }

    PrefilterResult out;
    out.removed_everything = alloc.l_s > 0 && alloc.sym_mask == alloc.mask;
    out.samples.reserve(cfg.n_ofdm * cfg.n_dft);
    cvec symbol(cfg.n_dft);
    for (std::size_t n = 0; n < cfg.n_ofdm; ++n) {
        const std::size_t start = n * cfg.n_sym() + cfg.l_cp;
        std::copy_n(frame.samples.begin() + static_cast<std::ptrdiff_t>(start), cfg.n_dft,
                    symbol.begin());
        fft_unitary(symbol);
        for (std::size_t k = 0; k < cfg.n_dft; ++k) {
            if (alloc.sym_mask[k]) {
                symbol[k] = cplx(0.0, 0.0);
            }
        }
        ifft_unitary(symbol);
        out.samples.insert(out.samples.end(), symbol.begin(), symbol.end());
    }
    return out;
}

EstimationReport estimate_with_policy(const TimeDomainFrame& frame,
                                      const AllocationPattern& alloc,
                                      EstimatorPolicy policy) {
    if (policy == EstimatorPolicy::plain) {
        return mbe_estimate(frame.samples);
    }
    PrefilterResult filtered = prefilter_symmetric(frame, alloc);
    const bool all_zero = std::all_of(filtered.samples.begin(), filtered.samples.end(),
                                      [](const cplx& v) { return v == cplx(0.0, 0.0); });
    EstimationReport rep;
    if (all_zero) {
        rep.alpha_hat = cplx(0.0, 0.0);
        rep.n_samples_used = filtered.samples.size();
    } else {
        rep = mbe_estimate(filtered.samples);
    }
    rep.prefiltered = true;
    rep.symmetric_only = filtered.removed_everything;
    return rep;
}

} // namespace iqb
