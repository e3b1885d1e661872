#include "iqbound/impairment.hpp"

#include <stdexcept>

namespace iqb {

namespace {

ImbalanceParams make_params(double epsilon, double phi, double lo_phase) {
    ImbalanceParams p;
    p.epsilon = epsilon;
    p.phi = phi;
    p.lo_phase = lo_phase;
    const double c = std::cos(phi / 2.0);
    const double s = std::sin(phi / 2.0);
    const cplx rot = std::polar(1.0, lo_phase);
    p.k1 = rot * cplx(c, -epsilon * s);
    p.k2 = rot * cplx(epsilon * c, s);
    if (p.k1 == cplx(0.0, 0.0)) {
        throw std::invalid_argument("ImbalanceParams: k1 is zero, model degenerate");
    }
    p.alpha = p.k2 / std::conj(p.k1);
    p.ilr_db = to_db(std::norm(p.k2) / std::norm(p.k1));
    return p;
}

} // namespace

ImbalanceParams from_gain_phase(double epsilon, double phi) {
    return make_params(epsilon, phi, 0.0);
}

ImbalanceParams from_target_ilr(double ilr_db, RandomStream& rng) {
    if (!std::isfinite(ilr_db) || ilr_db > 0.0) {
        throw std::invalid_argument("from_target_ilr: target ILR must be finite and <= 0 dB");
    }
    const double mag = std::pow(10.0, ilr_db / 20.0);
    const double arg = 2.0 * pi * rng.uniform();
    return make_params(mag, 0.0, arg / 2.0);
}

TimeDomainFrame apply_imbalance(const TimeDomainFrame& frame, const ImbalanceParams& params) {
    TimeDomainFrame out;
    out.config = frame.config;
    out.samples.resize(frame.samples.size());
    for (std::size_t n = 0; n < frame.samples.size(); ++n) {
        out.samples[n] = params.k1 * frame.samples[n] + params.k2 * std::conj(frame.samples[n]);
    }
    return out;
}

TimeDomainFrame add_noise(const TimeDomainFrame& frame, double sigma_sq, RandomStream& rng) {
    if (sigma_sq < 0.0) {
        throw std::invalid_argument("add_noise: variance must be non-negative");
    }
    TimeDomainFrame out = frame;
    if (sigma_sq == 0.0) {
        return out;
    }
    for (auto& v : out.samples) {
        v += rng.circular_gaussian(sigma_sq);
    }
    return out;
}

TimeDomainFrame compensate(const TimeDomainFrame& frame, cplx alpha_hat) {
    TimeDomainFrame out;
    out.config = frame.config;
    out.samples.resize(frame.samples.size());
    for (std::size_t n = 0; n < frame.samples.size(); ++n) {
        out.samples[n] = frame.samples[n] - alpha_hat * std::conj(frame.samples[n]);
    }
    return out;
}

double residual_ilr_db(cplx alpha, cplx alpha_hat, bool exact) {
    const double num = std::norm(alpha - alpha_hat);
    if (!exact) {
        return to_db(num);
    }
    const double den = std::norm(cplx(1.0, 0.0) - alpha_hat * std::conj(alpha));
    if (den == 0.0) {
        throw std::domain_error("residual_ilr_db: compensation denominator vanishes");
    }
    return to_db(num / den);
}

} // namespace iqb
