#include "iqbound/montecarlo.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "iqbound/impairment.hpp"

namespace iqb {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::uint64_t fnv1a(std::span<const std::string> lines) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& line : lines) {
        for (char c : line) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        h ^= '\n';
        h *= 1099511628211ull;
    }
    return h;
}

std::string sweep_kind_name(SweepKind kind) {
    switch (kind) {
    case SweepKind::none:
        return "none";
    case SweepKind::alloc:
        return "alloc";
    case SweepKind::snr_db:
        return "snr-db";
    case SweepKind::ilr_db:
        return "ilr-db";
    }
    return "?";
}

// One concrete sweep point: the axis value replaces the matching field.
RunConfig point_config(const RunConfig& base, double value) {
    RunConfig cfg = base;
    switch (base.axis.kind) {
    case SweepKind::none:
        break;
    case SweepKind::alloc:
        cfg.alloc_l_s = static_cast<std::size_t>(std::llround(value));
        cfg.custom_alloc.reset();
        break;
    case SweepKind::snr_db: {
        const double signal = cfg.ofdm.sigma_d_sq / static_cast<double>(cfg.ofdm.n_dft);
        cfg.sigma_eta_s_sq = signal / from_db(value);
        break;
    }
    case SweepKind::ilr_db:
        cfg.ilr_db = value;
        break;
    }
    return cfg;
}

} // namespace

AllocationPattern RunConfig::allocation() const {
    if (custom_alloc) {
        if (custom_alloc->n_dft != ofdm.n_dft) {
            throw std::invalid_argument("RunConfig: custom allocation size does not match n_dft");
        }
        return *custom_alloc;
    }
    return make_allocation(alloc_kind, alloc_l_s, ofdm.n_dft);
}

std::string policy_series_name(EstimatorPolicy policy) {
    return policy == EstimatorPolicy::plain ? "mbe_plain" : "mbe_prefiltered";
}

std::vector<std::string> bound_series_names(const RunConfig& config) {
    std::vector<std::string> names{"crlb_fast", "crlb_simplified"};
    if (config.flat_reference_bound) {
        names.push_back("crlb_fast_flat");
    }
    return names;
}

RunRecord run_once(const RunConfig& config, std::uint64_t run_index) {
    config.ofdm.validate();
    const AllocationPattern alloc = config.allocation();
    const ModulationAlphabet alphabet = qam_alphabet(config.mod_order);

    ChannelRealization channel{{cplx(1.0, 0.0)}, config.channel.sample_rate};
    if (config.channel.kind == ChannelKind::tdl) {
        auto rng = RandomStream::substream(config.master_seed, run_index, stream_purpose::channel);
        channel = realize_tdl(config.channel.profile, config.channel.sample_rate, rng);
        channel = normalize_power(channel, alloc);
    }

    auto rng_imb = RandomStream::substream(config.master_seed, run_index, stream_purpose::imbalance);
    const ImbalanceParams params = from_target_ilr(config.ilr_db, rng_imb);

    auto rng_data = RandomStream::substream(config.master_seed, run_index, stream_purpose::data);
    TimeDomainFrame frame = generate_frame(config.ofdm, alloc, alphabet, rng_data);
    frame = apply_linear(channel, frame);
    auto rng_ns = RandomStream::substream(config.master_seed, run_index, stream_purpose::noise_pre);
    frame = add_noise(frame, config.sigma_eta_s_sq, rng_ns);
    frame = apply_imbalance(frame, params);
    auto rng_nr = RandomStream::substream(config.master_seed, run_index, stream_purpose::noise_post);
    frame = add_noise(frame, config.sigma_eta_r_sq, rng_nr);

    RunRecord rec;
    rec.alpha = params.alpha;
    rec.alpha_hat.reserve(config.policies.size());
    for (EstimatorPolicy policy : config.policies) {
        rec.alpha_hat.push_back(estimate_with_policy(frame, alloc, policy).alpha_hat);
    }

    ModelSpec model;
    model.config = config.ofdm;
    model.alloc = alloc;
    model.channel_taps = channel.taps;
    model.noise = NoiseSpec{config.sigma_eta_s_sq, config.sigma_eta_r_sq};
    model.params = params;

    const SpectralCovariances sc = spectral_covariances(model);
    const CrlbResult fast = crlb_alpha(fim_fast(sc, config.ofdm.n_ofdm));
    const CrlbResult simplified = crlb_simplified(sc, config.ofdm.n_ofdm);
    rec.bound_var.push_back(fast.var_alpha);
    rec.bound_var.push_back(simplified.var_alpha);
    rec.zero_bound = fast.zero_bound || simplified.zero_bound;
    if (config.flat_reference_bound) {
        ModelSpec flat_model = model;
        flat_model.channel_taps = {cplx(1.0, 0.0)};
        const CrlbResult flat =
            crlb_alpha(fim_fast(spectral_covariances(flat_model), config.ofdm.n_ofdm));
        rec.bound_var.push_back(flat.var_alpha);
        rec.zero_bound = rec.zero_bound || flat.zero_bound;
    }
    return rec;
}

AggregateRow aggregate_series(double sweep_value, std::string series,
                              std::span<const double> linear_values) {
    const std::size_t r = linear_values.size();
    if (r == 0) {
        throw std::invalid_argument("aggregate_series: no values");
    }
    double mean = 0.0;
    for (double v : linear_values) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("aggregate_series: non-finite value in series " + series);
        }
        mean += v;
    }
    mean /= static_cast<double>(r);
    double var = 0.0;
    for (double v : linear_values) {
        var += (v - mean) * (v - mean);
    }
    var = r > 1 ? var / static_cast<double>(r - 1) : 0.0;
    const double se = std::sqrt(var / static_cast<double>(r));

    AggregateRow row;
    row.sweep_value = sweep_value;
    row.series = std::move(series);
    row.mean_db = to_db(mean);
    row.stderr_db = mean > 0.0 ? (10.0 / std::log(10.0)) * se / mean : 0.0;
    row.runs = r;
    return row;
}

AggregateResult sweep(const RunConfig& config) {
    if (config.runs < 1) {
        throw std::invalid_argument("sweep: runs must be at least 1");
    }
    std::vector<double> points = config.axis.values;
    if (config.axis.kind == SweepKind::none || points.empty()) {
        points = {0.0};
    }

    AggregateResult result;
    {
        std::ostringstream alloc_desc;
        if (config.custom_alloc) {
            alloc_desc << "custom(l_s=" << config.custom_alloc->l_s << ")";
        } else {
            alloc_desc << (config.alloc_kind == AllocationKind::contiguous_low ? "contiguous:"
                                                                               : "symmetric:")
                       << config.alloc_l_s;
        }
        auto& md = result.metadata;
        md.push_back("tool = iqbound sweep");
        md.push_back("version = 0.1.0");
        md.push_back("seed = " + std::to_string(config.master_seed));
        md.push_back("runs = " + std::to_string(config.runs));
        md.push_back("n_dft = " + std::to_string(config.ofdm.n_dft));
        md.push_back("l_cp = " + std::to_string(config.ofdm.l_cp));
        md.push_back("n_ofdm = " + std::to_string(config.ofdm.n_ofdm));
        md.push_back("sigma_d_sq = " + fmt_double(config.ofdm.sigma_d_sq));
        md.push_back("mod_order = " + std::to_string(config.mod_order));
        md.push_back("alloc = " + alloc_desc.str());
        md.push_back(std::string("channel = ") +
                     (config.channel.kind == ChannelKind::flat ? "flat" : config.channel.profile.name));
        if (config.channel.kind == ChannelKind::tdl) {
            md.push_back("sample_rate = " + fmt_double(config.channel.sample_rate));
        }
        md.push_back("sigma_eta_s_sq = " + fmt_double(config.sigma_eta_s_sq));
        md.push_back("sigma_eta_r_sq = " + fmt_double(config.sigma_eta_r_sq));
        md.push_back("ilr_db = " + fmt_double(config.ilr_db));
        std::string policies;
        for (EstimatorPolicy p : config.policies) {
            policies += (policies.empty() ? "" : "+") + policy_series_name(p);
        }
        md.push_back("policies = " + policies);
        std::ostringstream axis;
        axis << sweep_kind_name(config.axis.kind);
        for (double v : points) {
            axis << (axis.str().size() == sweep_kind_name(config.axis.kind).size() ? ":" : ",")
                 << fmt_double(v);
        }
        md.push_back("axis = " + axis.str());
        // Worker count deliberately not echoed: output must not depend on it.
        char hash_buf[32];
        std::snprintf(hash_buf, sizeof(hash_buf), "%016" PRIx64, fnv1a(md));
        md.push_back(std::string("config_hash = ") + hash_buf);
    }

    const std::vector<std::string> bounds = bound_series_names(config);
    for (double value : points) {
        const RunConfig pc = point_config(config, value);
        std::vector<RunRecord> records(config.runs);

        std::atomic<std::uint64_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto work = [&]() {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= config.runs) {
                    return;
                }
                try {
                    records[i] = run_once(pc, i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                    next.store(config.runs);
                    return;
                }
            }
        };
        const unsigned workers = std::max(1u, config.workers);
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t) {
            pool.emplace_back(work);
        }
        work();
        for (auto& t : pool) {
            t.join();
        }
        if (first_error) {
            std::rethrow_exception(first_error);
        }

        // Deterministic reduction in run-index order.
        std::vector<double> linear(config.runs);
        for (std::size_t p = 0; p < config.policies.size(); ++p) {
            for (std::uint64_t r = 0; r < config.runs; ++r) {
                linear[r] = std::norm(records[r].alpha - records[r].alpha_hat[p]);
            }
            result.rows.push_back(
                aggregate_series(value, policy_series_name(config.policies[p]), linear));
        }
        for (std::size_t b = 0; b < bounds.size(); ++b) {
            for (std::uint64_t r = 0; r < config.runs; ++r) {
                linear[r] = records[r].bound_var[b];
            }
            result.rows.push_back(aggregate_series(value, bounds[b], linear));
        }
    }
    return result;
}

std::string to_csv(const AggregateResult& result) {
    std::string out;
    for (const auto& line : result.metadata) {
        out += "# " + line + "\n";
    }
    out += "sweep_value,policy_or_bound,mean_db,stderr_db,runs\n";
    for (const auto& row : result.rows) {
        out += fmt_double(row.sweep_value) + "," + row.series + "," + fmt_double(row.mean_db) +
               "," + fmt_double(row.stderr_db) + "," + std::to_string(row.runs) + "\n";
    }
    return out;
}

void write_csv(const std::string& path, const AggregateResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_csv: cannot open " + path);
    }
    out << to_csv(result);
}

} // namespace iqb
