#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iqbound/rng.hpp"
#include "iqbound/types.hpp"

namespace iqb {

/// Square QAM constellation, scaled to unit average power.
struct ModulationAlphabet {
    unsigned order = 0;
    cvec points;
};

/// Binary subcarrier allocation mask with its symmetric/asymmetric split.
///
/// The symmetric part pairs each active bin with an active spectral image
/// (bin k with bin (N - k) mod N); the asymmetric part has no active image.
/// Bins 0 and N/2 are their own images and count as symmetric when active.
struct AllocationPattern {
    enum class Kind { asymmetric, symmetric, mixed };

    std::size_t n_dft = 0;
    std::vector<std::uint8_t> mask;
    std::vector<std::uint8_t> sym_mask;
    std::vector<std::uint8_t> asym_mask;
    std::size_t l_s = 0;

    static AllocationPattern from_mask(std::vector<std::uint8_t> mask);

    Kind classify() const;
};

enum class AllocationKind { contiguous_low, symmetric_dc };

/// Built-in allocation constructors. contiguous_low fills bins 1..l_s,
/// symmetric_dc fills l_s/2 bins on each side of DC. Bin 0 is excluded by
/// both so purely asymmetric patterns remain constructible (the DC bin is its
/// own spectral image); custom masks may still include it.
AllocationPattern make_allocation(AllocationKind kind, std::size_t l_s, std::size_t n_dft);

struct OfdmConfig {
    std::size_t n_dft = 0;
    std::size_t l_cp = 0;
    std::size_t n_ofdm = 1;
    double sigma_d_sq = 1.0;

    std::size_t n_sym() const { return l_cp + n_dft; }
    std::size_t total_samples() const { return n_ofdm * n_sym(); }
    void validate() const;
};

struct TimeDomainFrame {
    OfdmConfig config;
    cvec samples;
};

ModulationAlphabet qam_alphabet(unsigned order);

/// One frequency-domain OFDM symbol: zero on unallocated bins, uniform
/// constellation draws elsewhere, scaled so E|d[k]|^2 = sigma_d_sq / l_s on
/// active bins (total symbol energy sigma_d_sq for every allocation).
cvec draw_symbols(const AllocationPattern& alloc, const ModulationAlphabet& alphabet,
                  double sigma_d_sq, RandomStream& rng);

/// Unitary inverse DFT plus cyclic prefix; output length l_cp + n_dft.
cvec ofdm_modulate(std::span<const cplx> d, const OfdmConfig& config);

TimeDomainFrame generate_frame(const OfdmConfig& config, const AllocationPattern& alloc,
                               const ModulationAlphabet& alphabet, RandomStream& rng);

/// Normalized kurtosis of OFDM time samples predicted from the constellation
/// fourth moment: kappa4(alphabet) / l_s. For square M-QAM the constellation
/// term equals -(3/5)(M+1)/(M-1), so the value decays to 0 (Gaussian) as the
/// number of allocated subcarriers grows.
double predicted_kurtosis(unsigned mod_order, std::size_t l_s);

/// Sample estimate of E|x|^4 / (E|x|^2)^2 - 2.
double empirical_kurtosis(std::span<const cplx> samples);

} // namespace iqb
