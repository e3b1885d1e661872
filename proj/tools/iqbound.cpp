// iqbound: CRLB evaluation and Monte Carlo benchmarking for blind receiver
// I/Q imbalance estimation in CP-OFDM systems.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "iqbound/crlb.hpp"
#include "iqbound/montecarlo.hpp"
#include "iqbound/selftest.hpp"

namespace {

constexpr const char* version = "0.1.0";

struct CliOptions {
    iqb::RunConfig run;
    std::string alloc_spec = "contiguous:64";
    std::string channel_spec = "flat";
    double sample_rate = 0.0;
    double xi_s_db = std::numeric_limits<double>::quiet_NaN();
    bool no_noise = false;
    bool l_cp_explicit = false;
    std::string preset;
    std::string axis_spec;
    std::string out_path;
    std::string config_path;
    std::set<std::string> config_keys; // keys assigned from the config file
    // selftest
    unsigned st_models = 40;
    unsigned st_draws = 60;
    double st_perturb = 0.0;
};

std::string data_dir() {
    if (const char* env = std::getenv("IQBOUND_DATA_DIR")) {
        return env;
    }
    return IQBOUND_DATA_DIR;
}

iqb::DelayProfile resolve_profile(const std::string& spec) {
    if (spec == "tdlb100") {
        iqb::DelayProfile p = iqb::load_delay_profile(data_dir() + "/tdlb100.txt");
        p.name = "tdlb100";
        return p;
    }
    if (spec.rfind("exp:", 0) == 0) {
        // exp:<taps>:<spacing_ns>:<decay_ns>
        unsigned taps = 0;
        double spacing = 0.0, decay = 0.0;
        if (std::sscanf(spec.c_str(), "exp:%u:%lf:%lf", &taps, &spacing, &decay) != 3) {
            throw std::invalid_argument("channel spec must be exp:<taps>:<spacing_ns>:<decay_ns>");
        }
        return iqb::exponential_profile(taps, spacing, decay);
    }
    return iqb::load_delay_profile(spec); // treat as a profile file path
}

void parse_alloc(const std::string& spec, iqb::RunConfig& cfg) {
    if (spec.rfind("contiguous:", 0) == 0) {
        cfg.alloc_kind = iqb::AllocationKind::contiguous_low;
        cfg.alloc_l_s = std::stoul(spec.substr(11));
        cfg.custom_alloc.reset();
        return;
    }
    if (spec.rfind("symmetric:", 0) == 0) {
        cfg.alloc_kind = iqb::AllocationKind::symmetric_dc;
        cfg.alloc_l_s = std::stoul(spec.substr(10));
        cfg.custom_alloc.reset();
        return;
    }
    if (spec.rfind("mask:", 0) == 0) {
        const std::string bits = spec.substr(5);
        std::vector<std::uint8_t> mask;
        mask.reserve(bits.size());
        for (char c : bits) {
            if (c != '0' && c != '1') {
                throw std::invalid_argument("mask allocation must be a 0/1 string");
            }
            mask.push_back(c == '1' ? 1 : 0);
        }
        cfg.custom_alloc = iqb::AllocationPattern::from_mask(std::move(mask));
        return;
    }
    if (spec == "full") {
        std::vector<std::uint8_t> mask(cfg.ofdm.n_dft, 1);
        cfg.custom_alloc = iqb::AllocationPattern::from_mask(std::move(mask));
        return;
    }
    throw std::invalid_argument("allocation spec must be contiguous:L, symmetric:L, mask:BITS or full");
}

iqb::SweepAxis parse_axis(const std::string& spec) {
    iqb::SweepAxis axis;
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("axis spec must be kind:lo..hi[:step] or kind:v1,v2,...");
    }
    const std::string kind = spec.substr(0, colon);
    if (kind == "alloc") {
        axis.kind = iqb::SweepKind::alloc;
    } else if (kind == "snr-db") {
        axis.kind = iqb::SweepKind::snr_db;
    } else if (kind == "ilr-db") {
        axis.kind = iqb::SweepKind::ilr_db;
    } else {
        throw std::invalid_argument("axis kind must be alloc, snr-db or ilr-db");
    }
    const std::string body = spec.substr(colon + 1);
    const auto range_pos = body.find("..");
    if (range_pos == std::string::npos) {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            axis.values.push_back(std::stod(item));
        }
    } else {
        const double lo = std::stod(body.substr(0, range_pos));
        std::string rest = body.substr(range_pos + 2);
        double step = 0.0;
        const auto step_pos = rest.find(':');
        if (step_pos != std::string::npos) {
            step = std::stod(rest.substr(step_pos + 1));
            rest = rest.substr(0, step_pos);
        }
        const double hi = std::stod(rest);
        if (hi < lo) {
            throw std::invalid_argument("axis range must be increasing");
        }
        if (step <= 0.0) {
            step = axis.kind == iqb::SweepKind::alloc ? std::max(1.0, std::round((hi - lo) / 12.0))
                                                      : 5.0;
        }
        for (double v = lo; v <= hi + 1e-9; v += step) {
            axis.values.push_back(axis.kind == iqb::SweepKind::alloc ? std::round(v) : v);
        }
    }
    if (axis.values.empty()) {
        throw std::invalid_argument("axis spec produced no points");
    }
    return axis;
}

struct Preset {
    std::size_t n_dft, l_cp, n_ofdm;
    unsigned mod_order;
    double sigma_d_sq, sigma_eta_s_sq, sigma_eta_r_sq, ilr_db, sample_rate;
    std::string channel, alloc, axis;
    std::uint64_t runs;
};

Preset lookup_preset(const std::string& name) {
    // Full-scale presets mirror a 5G-NR 100 MHz numerology; desk presets keep
    // the same structure at CI-friendly size.
    const Preset paper{4096, 288, 10, 1024, 1.0, 1e-2, 1e-3, -20.0, 122.88e6,
                       "tdlb100", "contiguous:1649", "", 100000};
    const Preset desk{256, 18, 10, 1024, 1.0, 3.90625e-5, 3.90625e-6, -20.0, 7.68e6,
                      "tdlb100", "contiguous:127", "", 1000};
    Preset p;
    if (name.rfind("paper-", 0) == 0) {
        p = paper;
    } else if (name.rfind("desk-", 0) == 0) {
        p = desk;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    if (name.ends_with("fig3")) {
        p.axis = p.n_dft == 4096 ? "alloc:12..3300" : "alloc:16..240";
    } else if (name.ends_with("fig4")) {
        p.axis = "snr-db:-10..50";
    } else if (name.ends_with("fig5")) {
        p.axis = "ilr-db:-60..0";
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return p;
}

// Flat key = value configuration file; command-line flags take precedence.
void apply_config_file(const CLI::App* cmd, CliOptions& opt) {
    std::ifstream in(opt.config_path);
    if (!in) {
        throw std::invalid_argument("cannot open config file " + opt.config_path);
    }
    const auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config file line without '=': " + line);
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        const CLI::Option* o = cmd->get_option_no_throw("--" + key);
        if (o == nullptr) {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
        if (o->count() > 0) {
            continue; // explicit flag wins
        }
        opt.config_keys.insert(key);
        if (key == "n-dft") opt.run.ofdm.n_dft = std::stoul(value);
        else if (key == "l-cp") { opt.run.ofdm.l_cp = std::stoul(value); opt.l_cp_explicit = true; }
        else if (key == "n-ofdm") opt.run.ofdm.n_ofdm = std::stoul(value);
        else if (key == "mod-order") opt.run.mod_order = static_cast<unsigned>(std::stoul(value));
        else if (key == "sigma-d-sq") opt.run.ofdm.sigma_d_sq = std::stod(value);
        else if (key == "sigma-eta-s-sq") opt.run.sigma_eta_s_sq = std::stod(value);
        else if (key == "sigma-eta-r-sq") opt.run.sigma_eta_r_sq = std::stod(value);
        else if (key == "xi-s-db") opt.xi_s_db = std::stod(value);
        else if (key == "no-noise") opt.no_noise = value == "1" || value == "true";
        else if (key == "ilr") opt.run.ilr_db = std::stod(value);
        else if (key == "alloc") opt.alloc_spec = value;
        else if (key == "channel") opt.channel_spec = value;
        else if (key == "sample-rate") opt.sample_rate = std::stod(value);
        else if (key == "seed") opt.run.master_seed = std::stoull(value);
        else if (key == "preset") opt.preset = value;
        else if (key == "axis") opt.axis_spec = value;
        else if (key == "runs") opt.run.runs = std::stoull(value);
        else if (key == "workers") opt.run.workers = static_cast<unsigned>(std::stoul(value));
        else if (key == "flat-reference") opt.run.flat_reference_bound = value == "1" || value == "true";
        else if (key == "out") opt.out_path = value;
        else {
            throw std::invalid_argument("config key '" + key + "' is not configurable");
        }
    }
}

void apply_preset(const CLI::App* cmd, CliOptions& opt) {
    if (opt.preset.empty()) {
        return;
    }
    const Preset p = lookup_preset(opt.preset);
    const auto unset = [cmd, &opt](const std::string& flag) {
        const CLI::Option* o = cmd->get_option_no_throw(flag);
        return o != nullptr && o->count() == 0 && opt.config_keys.count(flag.substr(2)) == 0;
    };
    if (unset("--n-dft")) opt.run.ofdm.n_dft = p.n_dft;
    if (unset("--l-cp")) opt.run.ofdm.l_cp = p.l_cp;
    if (unset("--n-ofdm")) opt.run.ofdm.n_ofdm = p.n_ofdm;
    if (unset("--mod-order")) opt.run.mod_order = p.mod_order;
    if (unset("--sigma-d-sq")) opt.run.ofdm.sigma_d_sq = p.sigma_d_sq;
    if (unset("--sigma-eta-s-sq")) opt.run.sigma_eta_s_sq = p.sigma_eta_s_sq;
    if (unset("--sigma-eta-r-sq")) opt.run.sigma_eta_r_sq = p.sigma_eta_r_sq;
    if (unset("--ilr")) opt.run.ilr_db = p.ilr_db;
    if (unset("--sample-rate")) opt.sample_rate = p.sample_rate;
    if (unset("--channel")) opt.channel_spec = p.channel;
    if (unset("--alloc")) opt.alloc_spec = p.alloc;
    if (unset("--axis")) opt.axis_spec = p.axis;
    if (unset("--runs")) opt.run.runs = p.runs;
}

void finalize_config(CliOptions& opt) {
    if (!opt.l_cp_explicit) {
        // normal-CP-like ratio, e.g. 288 @ 4096 and 18 @ 256
        opt.run.ofdm.l_cp = static_cast<std::size_t>(
            std::llround(0.0703125 * static_cast<double>(opt.run.ofdm.n_dft)));
    }
    parse_alloc(opt.alloc_spec, opt.run);
    if (opt.channel_spec == "flat") {
        opt.run.channel.kind = iqb::ChannelKind::flat;
    } else {
        opt.run.channel.kind = iqb::ChannelKind::tdl;
        opt.run.channel.profile = resolve_profile(opt.channel_spec);
        if (opt.sample_rate <= 0.0) {
            throw std::invalid_argument("--sample-rate is required for a tapped-delay-line channel");
        }
        opt.run.channel.sample_rate = opt.sample_rate;
    }
    if (!std::isnan(opt.xi_s_db)) {
        const double signal = opt.run.ofdm.sigma_d_sq / static_cast<double>(opt.run.ofdm.n_dft);
        opt.run.sigma_eta_s_sq = signal / iqb::from_db(opt.xi_s_db);
    }
    if (opt.no_noise) {
        opt.run.sigma_eta_s_sq = 0.0;
        opt.run.sigma_eta_r_sq = 0.0;
    }
    if (!opt.axis_spec.empty()) {
        opt.run.axis = parse_axis(opt.axis_spec);
    }
}

void add_model_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--n-dft", opt.run.ofdm.n_dft, "DFT size");
    cmd->add_option("--l-cp", opt.run.ofdm.l_cp, "cyclic prefix length in samples");
    cmd->add_option("--n-ofdm", opt.run.ofdm.n_ofdm, "number of OFDM symbols");
    cmd->add_option("--mod-order", opt.run.mod_order, "QAM order (4/16/64/256/1024)");
    cmd->add_option("--sigma-d-sq", opt.run.ofdm.sigma_d_sq, "mean symbol energy per OFDM symbol");
    cmd->add_option("--sigma-eta-s-sq", opt.run.sigma_eta_s_sq, "pre-imbalance noise variance");
    cmd->add_option("--sigma-eta-r-sq", opt.run.sigma_eta_r_sq, "post-imbalance noise variance");
    cmd->add_option("--xi-s-db", opt.xi_s_db,
                    "pre-imbalance SNR in dB (overrides --sigma-eta-s-sq)");
    cmd->add_flag("--no-noise", opt.no_noise, "zero both noise variances");
    cmd->add_option("--ilr", opt.run.ilr_db, "target image leakage ratio in dB");
    cmd->add_option("--alloc", opt.alloc_spec,
                    "allocation: contiguous:L | symmetric:L | mask:BITS | full");
    cmd->add_option("--channel", opt.channel_spec,
                    "flat | tdlb100 | exp:<taps>:<spacing_ns>:<decay_ns> | profile file");
    cmd->add_flag("--flat", [&opt](std::int64_t) { opt.channel_spec = "flat"; },
                  "shorthand for --channel flat");
    cmd->add_option("--sample-rate", opt.sample_rate, "sample rate in Hz (for TDL channels)");
    cmd->add_option("--seed", opt.run.master_seed, "master seed");
    cmd->add_option("--preset", opt.preset,
                    "paper-fig3|paper-fig4|paper-fig5|desk-fig3|desk-fig4|desk-fig5");
    cmd->add_option("--config", opt.config_path,
                    "flat key = value config file; flags take precedence");
}

std::string db_string(double var) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", iqb::to_db(var));
    return buf;
}

std::string lin_string(double var) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10e", var);
    return buf;
}

int cmd_crlb(CliOptions& opt) {
    finalize_config(opt);
    const iqb::RunConfig& cfg = opt.run;
    const iqb::AllocationPattern alloc = cfg.allocation();

    iqb::ChannelRealization channel{{iqb::cplx(1.0, 0.0)}, cfg.channel.sample_rate};
    if (cfg.channel.kind == iqb::ChannelKind::tdl) {
        auto rng = iqb::RandomStream::substream(cfg.master_seed, 0, iqb::stream_purpose::channel);
        channel = iqb::realize_tdl(cfg.channel.profile, cfg.channel.sample_rate, rng);
        channel = iqb::normalize_power(channel, alloc);
    }
    auto rng_imb = iqb::RandomStream::substream(cfg.master_seed, 0, iqb::stream_purpose::imbalance);
    const iqb::ImbalanceParams params = iqb::from_target_ilr(cfg.ilr_db, rng_imb);

    iqb::ModelSpec model;
    model.config = cfg.ofdm;
    model.alloc = alloc;
    model.channel_taps = channel.taps;
    model.noise = iqb::NoiseSpec{cfg.sigma_eta_s_sq, cfg.sigma_eta_r_sq};
    model.params = params;

    std::vector<std::string> lines;
    lines.push_back(std::string("version = ") + version);
    lines.push_back("seed = " + std::to_string(cfg.master_seed));
    lines.push_back("n_dft = " + std::to_string(cfg.ofdm.n_dft));
    lines.push_back("l_cp = " + std::to_string(cfg.ofdm.l_cp));
    lines.push_back("n_ofdm = " + std::to_string(cfg.ofdm.n_ofdm));
    lines.push_back("mod_order = " + std::to_string(cfg.mod_order));
    lines.push_back("sigma_d_sq = " + lin_string(cfg.ofdm.sigma_d_sq));
    lines.push_back("sigma_eta_s_sq = " + lin_string(cfg.sigma_eta_s_sq));
    lines.push_back("sigma_eta_r_sq = " + lin_string(cfg.sigma_eta_r_sq));
    lines.push_back("ilr_db = " + db_string(iqb::from_db(cfg.ilr_db)));
    lines.push_back("alloc = " + opt.alloc_spec + " (l_s = " + std::to_string(alloc.l_s) + ")");
    lines.push_back("channel = " + opt.channel_spec +
                    " (taps = " + std::to_string(channel.taps.size()) + ")");

    const iqb::SpectralCovariances sc = iqb::spectral_covariances(model);
    const iqb::CrlbResult fast = iqb::crlb_alpha(iqb::fim_fast(sc, cfg.ofdm.n_ofdm));
    const iqb::CrlbResult simplified = iqb::crlb_simplified(sc, cfg.ofdm.n_ofdm);

    constexpr std::size_t dense_guard = 2048;
    const std::size_t dense_n = cfg.ofdm.n_ofdm * (cfg.ofdm.l_cp > 0 ? cfg.ofdm.n_sym() : cfg.ofdm.n_dft);
    std::string full_note;
    double full_var = std::numeric_limits<double>::quiet_NaN();
    if (dense_n <= dense_guard) {
        full_var = iqb::crlb_alpha(iqb::fim_full(model, false, dense_guard)).var_alpha;
    } else {
        full_note = "skipped (N = " + std::to_string(dense_n) + " exceeds dense-path guard " +
                    std::to_string(dense_guard) + ")";
    }

    const auto emit = [&lines](const std::string& name, double var, const std::string& note) {
        if (note.empty()) {
            lines.push_back(name + " = " + lin_string(var) + "  (" + db_string(var) + " dB)");
        } else {
            lines.push_back(name + " = " + note);
        }
    };
    emit("crlb_full", full_var, full_note);
    emit("crlb_fast", fast.var_alpha, "");
    emit("crlb_simplified", simplified.var_alpha, "");
    if (fast.zero_bound) {
        lines.push_back("note = zero bound: noiseless asymmetric content pins alpha exactly");
    }

    for (const auto& line : lines) {
        std::cout << line << "\n";
    }
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot open " + opt.out_path);
        }
        for (const auto& line : lines) {
            out << line << "\n";
        }
    }
    return 0;
}

int cmd_sweep(CliOptions& opt) {
    finalize_config(opt);
    const iqb::AggregateResult result = iqb::sweep(opt.run);
    if (opt.out_path.empty()) {
        std::cout << iqb::to_csv(result);
    } else {
        iqb::write_csv(opt.out_path, result);
        std::cerr << "wrote " << opt.out_path << "\n";
    }
    return 0;
}

int cmd_selftest(const CliOptions& opt) {
    const iqb::SelfTestReport oracle =
        iqb::selftest_oracle_equivalence(opt.st_models, 1e-8, opt.run.master_seed + 7001);
    const iqb::SelfTestReport closed = iqb::selftest_closed_form_identities(
        opt.st_draws, 1e-10, opt.st_perturb, opt.run.master_seed + 7002);
    for (const auto& line : oracle.lines) {
        std::cout << (oracle.passed ? "[PASS] " : "[FAIL] ") << line << "\n";
    }
    for (const auto& line : closed.lines) {
        std::cout << (closed.passed ? "[PASS] " : "[FAIL] ") << line << "\n";
    }
    const bool ok = oracle.passed && closed.passed;
    std::cout << "selftest: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CRLB and estimator benchmarks for blind I/Q imbalance estimation in CP-OFDM"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    CliOptions opt;
    if (const char* env = std::getenv("IQBOUND_WORKERS")) {
        opt.run.workers = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }

    CLI::App* crlb = app.add_subcommand("crlb", "evaluate the bound for one model, all paths");
    add_model_options(crlb, opt);
    crlb->add_option("--out", opt.out_path, "write results to this file");

    CLI::App* sw = app.add_subcommand("sweep", "Monte Carlo sweep, CSV output");
    add_model_options(sw, opt);
    sw->add_option("--axis", opt.axis_spec, "sweep axis: alloc:lo..hi | snr-db:lo..hi | ilr-db:lo..hi");
    sw->add_option("--runs", opt.run.runs, "independent runs per sweep point");
    sw->add_option("--workers", opt.run.workers, "worker thread count (default $IQBOUND_WORKERS or 1)");
    sw->add_option("--out", opt.out_path, "output CSV path (default stdout)");
    sw->add_flag("--flat-reference", opt.run.flat_reference_bound,
                 "also evaluate the bound for a flat channel on each run");

    CLI::App* st = app.add_subcommand("selftest", "oracle-equivalence and identity suites");
    st->add_option("--models", opt.st_models, "random models for the oracle-equivalence suite");
    st->add_option("--draws", opt.st_draws, "random draws for the closed-form identity suite");
    st->add_option("--seed", opt.run.master_seed, "base seed");
    st->add_option("--perturb-sigma-r", opt.st_perturb,
                   "perturb the closed-form SNR convention (mutation check; nonzero must fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* model_cmd = crlb->parsed() ? crlb : (sw->parsed() ? sw : nullptr);
        if (model_cmd != nullptr) {
            if (!opt.config_path.empty()) {
                apply_config_file(model_cmd, opt);
            }
            apply_preset(model_cmd, opt);
            opt.l_cp_explicit = opt.l_cp_explicit || model_cmd->count("--l-cp") > 0 ||
                                !opt.preset.empty();
            return model_cmd == crlb ? cmd_crlb(opt) : cmd_sweep(opt);
        }
        return cmd_selftest(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
