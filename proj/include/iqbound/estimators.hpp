#pragma once

#include <span>

#include "iqbound/types.hpp"
#include "iqbound/waveform.hpp"

namespace iqb {

struct EstimationReport {
    cplx alpha_hat{0.0, 0.0};
    std::size_t n_samples_used = 0;
    bool prefiltered = false;
    // Set when pre-filtering removed all data-bearing spectral components
    // (purely symmetric allocation); the estimate then rests on noise alone.
    bool symmetric_only = false;
};

/// Blind moment-based imbalance estimate via circularity restoration. With
/// c2 = mean(r^2) and p = mean(|r|^2):
///   alpha_hat = c2 / (p + sqrt(p^2 - |c2|^2)),
/// which recovers alpha exactly in the noiseless population limit. The square
/// root argument is clamped at zero against finite-sample excursions.
EstimationReport mbe_estimate(std::span<const cplx> samples);

struct PrefilterResult {
    cvec samples; // CP-less concatenation of the filtered symbols
    bool removed_everything = false;
};

/// Removes the symmetrically allocated spectral components: per OFDM symbol
/// drop the CP, zero every bin of the symmetric sub-mask in the frequency
/// domain, and transform back.
PrefilterResult prefilter_symmetric(const TimeDomainFrame& frame,
                                    const AllocationPattern& alloc);

enum class EstimatorPolicy { plain, prefiltered };

/// plain: estimate over all frame samples, CP included (CP samples carry the
/// same imbalance signature). prefiltered: apply prefilter_symmetric first,
/// which necessarily drops the CP.
EstimationReport estimate_with_policy(const TimeDomainFrame& frame,
                                      const AllocationPattern& alloc, EstimatorPolicy policy);

} // namespace iqb
