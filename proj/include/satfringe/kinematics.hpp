#pragma once

#include <cmath>
#include <sstream>

#include "constants.hpp"
#include "errors.hpp"
#include "optical.hpp"

namespace satfringe {

// Kinematic phase and visibility for a double interferometer pass against a
// receding/approaching reflector, first order in nothing: all expressions are
// exact in beta within the stated domain.

/// Estimator/model domain guard; LEO radial speeds sit near 2e-5.
inline constexpr double beta_domain_limit = 1e-3;

inline void require_beta_in_domain(double beta, const char* where) {
    if (!(std::abs(beta) < beta_domain_limit)) {
        std::ostringstream os;
        os << where << ": |beta| = " << std::abs(beta)
           << " outside validity domain |beta| < " << beta_domain_limit;
        throw std::domain_error(os.str());
    }
}

/// Longitudinal Doppler factor for a retro-reflected beam, f = (1-b)/(1+b).
/// A delay dt leaves the ground twice-boosted as dt/f.
inline double doppler_factor(double beta) {
    require_beta_in_domain(beta, "doppler_factor");
    return (1.0 - beta) / (1.0 + beta);
}

/// Doppler-stretched copy of a ground delay.
inline double doppler_stretch(double dt_s, double beta) {
    return dt_s / doppler_factor(beta);
}

/// Derived boost bundle for one reflection epoch.
struct BoostParams {
    double beta;        // radial velocity / c, positive receding
    double gamma;       // 1/sqrt(1-beta^2)
    double f_beta;      // (1-beta)/(1+beta) = gamma^2 (1-beta)^2
    double sat_range_m; // one-way range at emission
    double t_rtt_s;     // pulse-peak round-trip time, 2 r / (c (1-beta))

    static BoostParams from_beta(double beta, double sat_range_m = 0.0) {
        require_beta_in_domain(beta, "BoostParams");
        BoostParams b;
        b.beta = beta;
        b.gamma = 1.0 / std::sqrt(1.0 - beta * beta);
        b.f_beta = (1.0 - beta) / (1.0 + beta);
        b.sat_range_m = sat_range_m;
        b.t_rtt_s = 2.0 / (1.0 - beta) * sat_range_m / speed_of_light;
        return b;
    }
};

/// Interference phase of the central peak, phi = (2 beta / (1+beta)) w0 dt.
/// Returned unwrapped (hundreds of radians at km/s speeds).
inline double kinematic_phase(double beta, const OpticalConfig& cfg) {
    require_beta_in_domain(beta, "kinematic_phase");
    return 2.0 * beta / (1.0 + beta) * cfg.angular_frequency() * cfg.mzi_delay_s;
}

/// Gaussian wavepacket overlap visibility,
/// V = exp(-2 pi (dt/tau_c * beta/(1+beta))^2).
inline double theoretical_visibility(double beta, const OpticalConfig& cfg) {
    require_beta_in_domain(beta, "theoretical_visibility");
    const double u = cfg.mzi_delay_s / cfg.coherence_time_s * beta / (1.0 + beta);
    return std::exp(-two_pi * u * u);
}

/// Central-peak probability normalised to the lateral peaks,
/// P_c = (1 - V cos phi)/2.  This is the quantity an experiment recovers as
/// N_c / (2 N_lateral); the raw per-port weights live in `peak_weights`.
inline double p_central_closed_form(double beta, const OpticalConfig& cfg) {
    return 0.5 * (1.0 - theoretical_visibility(beta, cfg) * std::cos(kinematic_phase(beta, cfg)));
}

/// Raw per-photon arrival-peak weights at the monitored output port.
/// Early and late are interference-free eighth shares; the complement
/// 1/2 + (V cos phi)/4 exits the unmonitored port.
struct PeakWeights {
    double early;
    double central;
    double late;

    double sum() const { return early + central + late; }
    double unmonitored() const { return 1.0 - sum(); }
};

inline PeakWeights peak_weights(double phase_rad, double visibility) {
    return {0.125, 0.25 * (1.0 - visibility * std::cos(phase_rad)), 0.125};
}

/// Everything the downstream pipeline needs about one track epoch.
struct KinematicSample {
    double t_s        = 0.0;
    double beta       = 0.0;
    double phase_rad  = 0.0; // unwrapped
    double visibility = 1.0;
    double p_central  = 0.0;

    static KinematicSample make(double t_s, double beta, const OpticalConfig& cfg) {
        KinematicSample s;
        s.t_s = t_s;
        s.beta = beta;
        s.phase_rad = kinematic_phase(beta, cfg);
        s.visibility = theoretical_visibility(beta, cfg);
        s.p_central = 0.5 * (1.0 - s.visibility * std::cos(s.phase_rad));
        return s;
    }
};

} // namespace satfringe
