#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqbound/covariance.hpp"
#include "iqbound/rng.hpp"

namespace iqb {

struct RandomModelOptions {
    std::vector<std::size_t> n_dft_choices{8, 16, 32};
    std::size_t max_n_ofdm = 3;
    bool with_cp = false; // l_cp = n_dft / 4 instead of 0
    std::size_t max_taps = 4;
    double min_ilr_db = -60.0;
    double max_ilr_db = -10.0;
    // Noise ranges relative to the per-sample signal power sigma_d_sq / n_dft.
    double noise_s_rel_min = 0.01;
    double noise_s_rel_max = 1.0;
    double noise_r_rel_min = 0.001;
    double noise_r_rel_max = 0.3;
};

/// Random well-conditioned model: random mask (at least one active bin),
/// random complex channel taps, random imbalance and noise levels.
ModelSpec random_model(RandomStream& rng, const RandomModelOptions& options = {});

struct SelfTestReport {
    bool passed = true;
    std::vector<std::string> lines;
};

/// Compares the per-bin Fisher information against the dense oracle on random
/// CP-free models; every entry must agree within tol_rel.
SelfTestReport selftest_oracle_equivalence(unsigned n_models, double tol_rel,
                                           std::uint64_t seed = 7001);

/// Checks the flat-channel closed forms against the small-imbalance bound on
/// their exact regimes. sigma_r_perturb scales the post-imbalance SNR passed
/// to the closed forms and exists to prove the identity test can fail.
SelfTestReport selftest_closed_form_identities(unsigned n_draws, double tol_rel,
                                               double sigma_r_perturb = 0.0,
                                               std::uint64_t seed = 7002);

} // namespace iqb
