#pragma once

#include <cmath>
#include <complex>
#include <sstream>

#include "constants.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "optical.hpp"
#include "quadrature.hpp"

namespace satfringe {

// Normalised Gaussian wavepacket
//   psi0(x) = (2/tau_c^2)^(1/4) exp(-pi x^2 / tau_c^2) exp(i w0 x)
// and the overlap integral the closed forms in kinematics.hpp compress.
// This is the independent route: no expression below assumes the closed-form
// phase/visibility results.

/// |psi0(x)|; carries the (2/tau^2)^(1/4) normalisation.
inline long double wavepacket_envelope(long double x, long double tau_c) {
    const long double n = std::pow(2.0L / (tau_c * tau_c), 0.25L);
    return n * std::exp(-pi * x * x / (tau_c * tau_c));
}

namespace detail {

// 2*pi folded into quad precision from its double-double split.
inline __float128 two_pi_q() {
    return __float128(2.0) *
           (__float128(3.141592653589793116) + __float128(1.2246467991473532e-16));
}

// Nearest-multiple reduction of a quad-precision phase into (-pi, pi].
// The carrier phase w0*x carries ~1e7 rad at nanosecond arguments; reducing
// in extended-double leaves ~1e-12 rad jitter, enough to swamp a 1e-12
// quadrature budget, so the reduction happens at 113-bit precision.
inline long double reduce_phase(__float128 phase) {
    const __float128 tp = two_pi_q();
    const long double n = std::nearbyint(static_cast<long double>(phase / tp));
    return static_cast<long double>(phase - tp * static_cast<__float128>(n));
}

} // namespace detail

/// Full complex amplitude.  The carrier phase w0*x reaches ~1e7 rad at
/// nanosecond arguments, so it is reduced mod 2pi in extended precision to
/// keep the *relative* phase between near-cancelling terms trustworthy.
inline std::complex<long double> wavepacket_amplitude(long double x, const OpticalConfig& cfg) {
    const long double w0 = 2.0L * static_cast<long double>(pi) *
                           static_cast<long double>(speed_of_light) /
                           static_cast<long double>(cfg.wavelength_vacuum_m);
    const long double theta = std::remainder(w0 * x, 2.0L * static_cast<long double>(pi));
    const long double env = wavepacket_envelope(x, static_cast<long double>(cfg.coherence_time_s));
    return {env * std::cos(theta), env * std::sin(theta)};
}

/// Numerical check of the normalisation, integral |psi0|^2 dt == 1.
inline double wavepacket_norm(const OpticalConfig& cfg) {
    const long double tau = cfg.coherence_time_s;
    auto f = [&](long double t) {
        const long double e = wavepacket_envelope(t, tau);
        return e * e;
    };
    auto q = integrate_adaptive<long double>(f, -12.0L * tau, 12.0L * tau, 1e-12L);
    if (!q.converged)
        throw numerical_error("wavepacket_norm: quadrature did not converge");
    return static_cast<double>(q.value);
}

/// Central-peak probability by direct quadrature of the boosted two-packet
/// overlap,
///   P_c = (f_beta/4) * integral |psi0(-f(t+dt)) - psi0(-dt - f t)|^2 dt.
/// Shares nothing with p_central_closed_form beyond psi0 itself.
inline double p_central_quadrature(double beta, const OpticalConfig& cfg,
                                   double abs_tol = 1e-12, int max_panels = 4096) {
    require_beta_in_domain(beta, "p_central_quadrature");
    const long double f = (1.0L - static_cast<long double>(beta)) / (1.0L + static_cast<long double>(beta));
    const long double dt = cfg.mzi_delay_s;
    const long double tau = cfg.coherence_time_s;
    const long double tau_stretched = tau / f;

    // The two amplitudes nearly cancel, so their relative carrier phase must
    // be good to ~1e-13 rad.  Form the packet arguments and reduce the phase
    // in quad precision; envelopes are benign and stay in extended double.
    const __float128 w0q = detail::two_pi_q() *
                           __float128(speed_of_light) /
                           __float128(cfg.wavelength_vacuum_m);
    const __float128 bq = beta;
    const __float128 fq = (__float128(1.0) - bq) / (__float128(1.0) + bq);
    const __float128 dtq = cfg.mzi_delay_s;
    auto amp = [&](__float128 x) -> std::complex<long double> {
        const long double env = wavepacket_envelope(static_cast<long double>(x), tau);
        const long double th = detail::reduce_phase(w0q * x);
        return {env * std::cos(th), env * std::sin(th)};
    };
    auto integrand = [&](long double t) {
        const __float128 tq = t;
        return std::norm(amp(-fq * (tq + dtq)) - amp(-dtq - fq * tq));
    };

    // Both packets are centred near t = -dt and only ~tau wide; hand those
    // edges to the integrator so the first panels cannot overlook them.
    const long double c1 = -dt;
    const long double c2 = -dt / f;
    const long double pad = 12.0L * tau_stretched;
    const long double half_span = dt + 10.0L * tau_stretched;
    std::vector<long double> cuts{std::min(c1, c2) - pad, (c1 + c2) / 2.0L,
                                  std::max(c1, c2) + pad};
    auto q = integrate_adaptive<long double>(integrand, -half_span, half_span,
                                             static_cast<long double>(abs_tol), max_panels,
                                             std::move(cuts));
    if (!q.converged) {
        std::ostringstream os;
        os << "p_central_quadrature: adaptive quadrature exhausted " << q.panels
           << " panels at estimate " << static_cast<double>(q.value)
           << " (error estimate " << static_cast<double>(q.error_estimate) << ")";
        throw numerical_error(os.str());
    }
    return static_cast<double>(f / 4.0L * q.value);
}

/// |g(tau)| for g(tau) = integral psi0*(t) psi0(t+tau) dt.
///
/// psi0 carries an exactly linear carrier phase, so the integrand's phase is
/// the constant w0*tau and |g| reduces to the envelope correlation; evaluating
/// it this way keeps the check meaningful for coherence times up to seconds,
/// where w0*t would exceed any float's phase resolution.
inline double autocorrelation_modulus(double tau, const OpticalConfig& cfg) {
    const long double tau_c = cfg.coherence_time_s;
    const long double shift = tau;
    auto f = [&](long double t) {
        return wavepacket_envelope(t, tau_c) * wavepacket_envelope(t + shift, tau_c);
    };
    // Product peaks at -shift/2 with width ~tau_c/sqrt(2).
    const long double centre = -shift / 2.0L;
    const long double half = std::abs(shift) + 12.0L * tau_c;
    auto q = integrate_adaptive<long double>(f, -half, half, 1e-10L, 20000,
                                             {centre - 8.0L * tau_c, centre, centre + 8.0L * tau_c});
    if (!q.converged)
        throw numerical_error("autocorrelation_modulus: quadrature did not converge");
    return static_cast<double>(q.value);
}

/// Same quantity through full complex arithmetic; cross-validates the
/// envelope shortcut at bench-scale coherence times.
inline std::complex<double> autocorrelation_complex(double tau, const OpticalConfig& cfg) {
    const long double tau_c = cfg.coherence_time_s;
    const long double shift = tau;
    auto f = [&](long double t) {
        return std::conj(wavepacket_amplitude(t, cfg)) * wavepacket_amplitude(t + shift, cfg);
    };
    const long double centre = -shift / 2.0L;
    const long double half = std::abs(shift) + 12.0L * tau_c;
    auto q = integrate_adaptive<long double>(f, -half, half, 1e-10L, 20000,
                                             {centre - 8.0L * tau_c, centre, centre + 8.0L * tau_c});
    if (!q.converged)
        throw numerical_error("autocorrelation_complex: quadrature did not converge");
    return {static_cast<double>(q.value.real()), static_cast<double>(q.value.imag())};
}

/// integral |g(tau)|^2 dtau, which must reproduce the configured coherence
/// time (the defining property of tau_c).  Nested adaptive quadrature.
inline double autocorrelation_check(const OpticalConfig& cfg);

inline double coherence_time_autocorrelation(const OpticalConfig& cfg) {
    const long double tau_c = cfg.coherence_time_s;
    auto f = [&](long double tau) {
        const double g = autocorrelation_modulus(static_cast<double>(tau), cfg);
        return static_cast<long double>(g) * static_cast<long double>(g);
    };
    auto q = integrate_adaptive<long double>(f, -12.0L * tau_c, 12.0L * tau_c,
                                             1e-9L * tau_c, 2048);
    if (!q.converged)
        throw numerical_error("coherence_time_autocorrelation: quadrature did not converge");
    return static_cast<double>(q.value);
}

inline double autocorrelation_check(const OpticalConfig& cfg) {
    return coherence_time_autocorrelation(cfg);
}

} // namespace satfringe
