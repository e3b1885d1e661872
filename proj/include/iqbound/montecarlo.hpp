#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iqbound/channel.hpp"
#include "iqbound/covariance.hpp"
#include "iqbound/crlb.hpp"
#include "iqbound/estimators.hpp"

namespace iqb {

enum class ChannelKind { flat, tdl };

struct ChannelSpec {
    ChannelKind kind = ChannelKind::flat;
    DelayProfile profile;
    double sample_rate = 0.0; // required for tdl
};

enum class SweepKind { none, alloc, snr_db, ilr_db };

struct SweepAxis {
    SweepKind kind = SweepKind::none;
    std::vector<double> values;
};

/// Full description of one randomized experiment. The axis overrides exactly
/// one field per sweep point: alloc -> l_s, snr_db -> sigma_eta_s_sq (via the
/// per-sample signal power sigma_d_sq / n_dft), ilr_db -> the target ILR.
struct RunConfig {
    OfdmConfig ofdm{256, 18, 10, 1.0};
    unsigned mod_order = 1024;
    AllocationKind alloc_kind = AllocationKind::contiguous_low;
    std::size_t alloc_l_s = 64;
    std::optional<AllocationPattern> custom_alloc;
    ChannelSpec channel;
    double sigma_eta_s_sq = 0.0;
    double sigma_eta_r_sq = 0.0;
    double ilr_db = -20.0;
    std::vector<EstimatorPolicy> policies{EstimatorPolicy::plain, EstimatorPolicy::prefiltered};
    bool flat_reference_bound = false;
    std::uint64_t runs = 1000;
    std::uint64_t master_seed = 1;
    SweepAxis axis;
    unsigned workers = 1;

    AllocationPattern allocation() const;
};

/// Everything observed in a single randomized run: realized imbalance, one
/// estimate per policy, one variance bound per path, all on the identical
/// realization.
struct RunRecord {
    cplx alpha{0.0, 0.0};
    std::vector<cplx> alpha_hat;  // config.policies order
    std::vector<double> bound_var; // bound_series_names order
    bool zero_bound = false;
};

struct AggregateRow {
    double sweep_value = 0.0;
    std::string series;
    double mean_db = 0.0;
    double stderr_db = 0.0;
    std::uint64_t runs = 0;
};

struct AggregateResult {
    std::vector<std::string> metadata; // echoed config, one "key = value" per line
    std::vector<AggregateRow> rows;
};

std::string policy_series_name(EstimatorPolicy policy);
std::vector<std::string> bound_series_names(const RunConfig& config);

/// Deterministic given (master_seed, run_index): every random purpose draws
/// from its own substream, so one run is reproducible in isolation and
/// independent of worker scheduling.
RunRecord run_once(const RunConfig& config, std::uint64_t run_index);

/// Iterates the sweep axis, runs R records per point (in parallel when
/// config.workers > 1) and aggregates in the linear domain.
AggregateResult sweep(const RunConfig& config);

/// Linear-domain aggregation: dB of the mean, never mean of dB; standard
/// error mapped to dB by the delta method.
AggregateRow aggregate_series(double sweep_value, std::string series,
                              std::span<const double> linear_values);

std::string to_csv(const AggregateResult& result);
void write_csv(const std::string& path, const AggregateResult& result);

} // namespace iqb
