#pragma once

#include <string>
#include <vector>

#include "iqbound/rng.hpp"
#include "iqbound/types.hpp"
#include "iqbound/waveform.hpp"

namespace iqb {

enum class Fading { rayleigh, fixed };

struct ProfileTap {
    double delay_ns = 0.0;
    double power_db = 0.0;
    Fading fading = Fading::rayleigh;
};

/// Tapped-delay-line power delay profile. Delays must be non-negative and
/// strictly increasing.
struct DelayProfile {
    std::string name;
    std::vector<ProfileTap> taps;

    void validate() const;
};

/// Parses the plain-text profile table: one `delay_ns,power_db,fading` row
/// per tap after a header line. `fading` is `rayleigh` or `fixed`.
DelayProfile load_delay_profile(const std::string& path);

/// Synthetic fallback profile: n_taps Rayleigh taps at uniform spacing with an
/// exponential power decay, total mean power normalized to one. Usable when no
/// standardized tap table is available.
DelayProfile exponential_profile(std::size_t n_taps, double spacing_ns, double decay_ns);

struct ChannelRealization {
    cvec taps;
    double sample_rate = 0.0;
};

/// Per-bin transfer values h_f[k] = sum_q h[q] exp(-j 2 pi k q / n_dft),
/// i.e. the eigenvalues of the circular-convolution matrix of the taps. With
/// this scaling the unitary DFT diagonalizes that matrix to diag(h_f) exactly.
struct FrequencyResponse {
    cvec h_f;
};

/// Draws one realization: tap delays are rounded to the nearest sample,
/// coinciding taps add coherently, Rayleigh taps are circular complex Gaussian
/// with the profile's mean power.
ChannelRealization realize_tdl(const DelayProfile& profile, double sample_rate,
                               RandomStream& rng);

/// Scales the taps by a positive real factor so that the power gain over the
/// allocated band is exactly one: sum_k |h_f[k]|^2 psi[k] = l_s.
ChannelRealization normalize_power(const ChannelRealization& channel,
                                   const AllocationPattern& alloc);

/// Causal linear convolution of the frame with the taps, truncated to the
/// frame length. For frames carrying a CP the channel memory must fit in it.
TimeDomainFrame apply_linear(const ChannelRealization& channel, const TimeDomainFrame& frame);

FrequencyResponse frequency_response(const ChannelRealization& channel, std::size_t n_dft);
FrequencyResponse frequency_response(const cvec& taps, std::size_t n_dft);

} // namespace iqb
