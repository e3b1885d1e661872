#include "iqbound/channel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "iqbound/fft.hpp"

namespace iqb {

void DelayProfile::validate() const {
    if (taps.empty()) {
        throw std::invalid_argument("DelayProfile: at least one tap required");
    }
    double prev = -1.0;
    for (const auto& t : taps) {
        if (t.delay_ns < 0.0 || t.delay_ns <= prev) {
            throw std::invalid_argument(
                "DelayProfile: delays must be non-negative and strictly increasing");
        }
        prev = t.delay_ns;
    }
}

DelayProfile load_delay_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_delay_profile: cannot open " + path);
    }
    DelayProfile profile;
    profile.name = path;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true; // first non-comment line is the column header
            continue;
        }
        std::stringstream ss(line);
        std::string delay_s, power_s, fading_s;
        if (!std::getline(ss, delay_s, ',') || !std::getline(ss, power_s, ',') ||
            !std::getline(ss, fading_s)) {
            throw std::runtime_error("load_delay_profile: malformed row '" + line + "'");
        }
        const auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        fading_s = strip(fading_s);
        ProfileTap tap;
        tap.delay_ns = std::stod(delay_s);
        tap.power_db = std::stod(power_s);
        if (fading_s == "rayleigh") {
            tap.fading = Fading::rayleigh;
        } else if (fading_s == "fixed") {
            tap.fading = Fading::fixed;
        } else {
            throw std::runtime_error("load_delay_profile: unknown fading '" + fading_s + "'");
        }
        profile.taps.push_back(tap);
    }
    profile.validate();
    return profile;
}

DelayProfile exponential_profile(std::size_t n_taps, double spacing_ns, double decay_ns) {
    if (n_taps == 0 || spacing_ns <= 0.0 || decay_ns <= 0.0) {
        throw std::invalid_argument("exponential_profile: invalid parameters");
    }
    DelayProfile profile;
    profile.name = "exp";
    double total = 0.0;
    std::vector<double> powers(n_taps);
    for (std::size_t i = 0; i < n_taps; ++i) {
        powers[i] = std::exp(-static_cast<double>(i) * spacing_ns / decay_ns);
        total += powers[i];
    }
    for (std::size_t i = 0; i < n_taps; ++i) {
        ProfileTap tap;
        tap.delay_ns = static_cast<double>(i) * spacing_ns;
        tap.power_db = 10.0 * std::log10(powers[i] / total);
        tap.fading = Fading::rayleigh;
        profile.taps.push_back(tap);
    }
    return profile;
}

ChannelRealization realize_tdl(const DelayProfile& profile, double sample_rate,
                               RandomStream& rng) {
    profile.validate();
    if (sample_rate <= 0.0) {
        throw std::invalid_argument("realize_tdl: sample_rate must be positive");
    }
    std::size_t max_idx = 0;
    std::vector<std::size_t> indices(profile.taps.size());
    for (std::size_t i = 0; i < profile.taps.size(); ++i) {
        indices[i] = static_cast<std::size_t>(
            std::llround(profile.taps[i].delay_ns * 1e-9 * sample_rate));
        max_idx = std::max(max_idx, indices[i]);
    }
    ChannelRealization ch;
    ch.sample_rate = sample_rate;
    ch.taps.assign(max_idx + 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < profile.taps.size(); ++i) {
        const double power = from_db(profile.taps[i].power_db);
        if (profile.taps[i].fading == Fading::rayleigh) {
            ch.taps[indices[i]] += rng.circular_gaussian(power);
        } else {
            ch.taps[indices[i]] += cplx(std::sqrt(power), 0.0);
        }
    }
    return ch;
}

ChannelRealization normalize_power(const ChannelRealization& channel,
                                   const AllocationPattern& alloc) {
    if (alloc.l_s == 0) {
        throw std::invalid_argument("normalize_power: allocation has no active subcarriers");
    }
    const FrequencyResponse fr = frequency_response(channel, alloc.n_dft);
    double gain = 0.0;
    for (std::size_t k = 0; k < alloc.n_dft; ++k) {
        if (alloc.mask[k]) {
            gain += std::norm(fr.h_f[k]);
        }
    }
    if (gain <= 0.0) {
        throw std::invalid_argument("normalize_power: channel has no energy in the allocated band");
    }
    const double scale = std::sqrt(static_cast<double>(alloc.l_s) / gain);
    ChannelRealization out = channel;
    for (auto& t : out.taps) {
        t *= scale;
    }
    return out;
}

TimeDomainFrame apply_linear(const ChannelRealization& channel, const TimeDomainFrame& frame) {
    const std::size_t q = channel.taps.size();
    if (q == 0) {
        throw std::invalid_argument("apply_linear: channel has no taps");
    }
    // Channel memory beyond the CP would smear across symbol boundaries and
    // break the circular per-symbol model.
    if (frame.config.l_cp > 0 && q > frame.config.l_cp + 1) {
        throw std::invalid_argument("apply_linear: channel memory exceeds the cyclic prefix");
    }
    const std::size_t n = frame.samples.size();
    TimeDomainFrame out;
    out.config = frame.config;
    out.samples.assign(n, cplx(0.0, 0.0));
    for (std::size_t m = 0; m < n; ++m) {
        cplx acc(0.0, 0.0);
        const std::size_t qmax = std::min(q, m + 1);
        for (std::size_t i = 0; i < qmax; ++i) {
            acc += channel.taps[i] * frame.samples[m - i];
        }
        out.samples[m] = acc;
    }
    return out;
}

FrequencyResponse frequency_response(const cvec& taps, std::size_t n_dft) {
    if (taps.empty() || taps.size() > n_dft) {
        throw std::invalid_argument("frequency_response: need 1 <= Q <= n_dft taps");
    }
    cvec padded(n_dft, cplx(0.0, 0.0));
    std::copy(taps.begin(), taps.end(), padded.begin());
    fft_unitary(padded);
    const double scale = std::sqrt(static_cast<double>(n_dft));
    FrequencyResponse fr;
    fr.h_f.resize(n_dft);
    for (std::size_t k = 0; k < n_dft; ++k) {
        fr.h_f[k] = scale * padded[k];
    }
    return fr;
}

FrequencyResponse frequency_response(const ChannelRealization& channel, std::size_t n_dft) {
    return frequency_response(channel.taps, n_dft);
}

} // namespace iqb
