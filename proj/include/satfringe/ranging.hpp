#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "kinematics.hpp"
#include "optical.hpp"
#include "rng.hpp"

namespace satfringe {

// Range tracks and their conversion to velocity/phase.  A track stores the
// round-trip optical path per ranging pulse: the receive-time separation of
// consecutive pulses is dT' = dT + dP/c, and inverting the two-way Doppler
// relation dT' = dT (1+beta)/(1-beta) gives the radial velocity exactly.

struct RangeTrack {
    double epoch_s = 0.0;   // fire epoch of samples_m[0]
    double cadence_s = 0.1; // fire-epoch separation dT
    std::vector<double> samples_m; // round-trip path per pulse

    double time_at(std::size_t k) const { return epoch_s + static_cast<double>(k) * cadence_s; }
    std::size_t size() const { return samples_m.size(); }

    void validate() const {
        if (!(cadence_s > 0.0))
            throw validation_error("RangeTrack: cadence must be positive");
        if (samples_m.size() < 2)
            throw validation_error("RangeTrack: need at least 2 samples");
        // |v_r| < 300 km/s rejects corrupt files long before physics breaks.
        const double max_step = 2.0 * cadence_s * speed_of_light * 1e-3;
        for (std::size_t k = 0; k < samples_m.size(); ++k) {
            if (!(samples_m[k] > 0.0) || !std::isfinite(samples_m[k])) {
                std::ostringstream os;
                os << "RangeTrack: sample " << k << " not a positive finite range";
                throw validation_error(os.str());
            }
            if (k > 0 && std::abs(samples_m[k] - samples_m[k - 1]) >= max_step) {
                std::ostringstream os;
                os << "RangeTrack: step " << k << " implies |v_r| >= 300 km/s";
                throw validation_error(os.str());
            }
        }
    }
};

/// v_r between samples index and index+1 from the exact Doppler inversion
/// beta = (dT' - dT)/(dT' + dT); no first-order dr/(2 dT) shortcut.
inline double estimate_radial_velocity(const RangeTrack& track, std::size_t index) {
    if (index + 1 >= track.samples_m.size())
        throw std::out_of_range("estimate_radial_velocity: index beyond last interval");
    const double dT = track.cadence_s;
    const double dr = track.samples_m[index + 1] - track.samples_m[index];
    const double dTp = dT + dr / speed_of_light;
    return speed_of_light * (dTp - dT) / (dTp + dT);
}

/// Epoch the interval's velocity estimate refers to: the midpoint of the two
/// *reflection* events.  Each pulse fired at t_k bounces at t_k + P_k/(2c);
/// using fire-epoch midpoints instead would misplace the estimate by one
/// light time, a 0.1-0.3 m/s error at LEO accelerations.
inline double velocity_epoch(const RangeTrack& track, std::size_t index) {
    if (index + 1 >= track.samples_m.size())
        throw std::out_of_range("velocity_epoch: index beyond last interval");
    const double one_way = (track.samples_m[index] + track.samples_m[index + 1]) /
                           (4.0 * speed_of_light);
    return track.time_at(index) + 0.5 * track.cadence_s + one_way;
}

enum class InterpKind { linear, cubic };

/// Kinematic knots at the track's velocity epochs plus an interpolation rule
/// for querying arbitrary times.  beta is the interpolated quantity; phase,
/// visibility and P_c are always recomputed from beta (the unwrapped phase
/// winds hundreds of radians between knots and is not interpolable).
struct PhaseTrack {
    std::vector<double> times_s;
    std::vector<KinematicSample> kinematics;
    InterpKind interpolation = InterpKind::cubic;
    OpticalConfig optical;
    std::vector<double> slopes_; // d(beta)/dt at knots (cubic only)

    double t_first() const { return times_s.front(); }
    double t_last() const { return times_s.back(); }
    std::size_t size() const { return times_s.size(); }
};

namespace detail {

/// Derivative at xs[k] of the parabola through the three points around k.
/// Exact for quadratics on any grid (a centered difference is not, once the
/// knots are light-time corrected and thus slightly non-uniform).
inline double parabola_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                             std::size_t i0, std::size_t at) {
    const double x0 = xs[i0], x1 = xs[i0 + 1], x2 = xs[i0 + 2];
    const double y0 = ys[i0], y1 = ys[i0 + 1], y2 = ys[i0 + 2];
    const double xt = xs[at];
    return y0 * (2.0 * xt - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
           y1 * (2.0 * xt - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           y2 * (2.0 * xt - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

inline std::vector<double> hermite_slopes(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    std::vector<double> m(n);
    m[0] = parabola_slope(xs, ys, 0, 0);
    for (std::size_t k = 1; k + 1 < n; ++k) m[k] = parabola_slope(xs, ys, k - 1, k);
    m[n - 1] = parabola_slope(xs, ys, n - 3, n - 1);
    return m;
}

} // namespace detail

/// Assemble a PhaseTrack from explicit (time, beta) knots.  Used by the
/// track builder below and directly by synthetic-profile tests.
inline PhaseTrack make_phase_track(std::vector<double> times, const std::vector<double>& betas,
                                   const OpticalConfig& cfg, InterpKind kind) {
    if (times.size() != betas.size() || times.size() < 1)
        throw validation_error("make_phase_track: need matching, non-empty knot arrays");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw validation_error("make_phase_track: times must be strictly increasing");
    PhaseTrack pt;
    pt.optical = cfg;
    pt.kinematics.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        pt.kinematics.push_back(KinematicSample::make(times[k], betas[k], cfg));
    pt.times_s = std::move(times);
    pt.interpolation = (pt.times_s.size() >= 4) ? kind : InterpKind::linear;
    if (pt.interpolation == InterpKind::cubic)
        pt.slopes_ = detail::hermite_slopes(pt.times_s, betas);
    return pt;
}

/// One kinematic knot per ranging interval, at the reflection-midpoint epoch.
inline PhaseTrack build_phase_track(const RangeTrack& track, const OpticalConfig& cfg,
                                    InterpKind kind = InterpKind::cubic) {
    track.validate();
    const std::size_t n = track.samples_m.size() - 1;
    std::vector<double> times(n), betas(n);
    for (std::size_t k = 0; k < n; ++k) {
        times[k] = velocity_epoch(track, k);
        betas[k] = estimate_radial_velocity(track, k) / speed_of_light;
    }
    return make_phase_track(std::move(times), betas, cfg, kind);
}

/// Interpolate beta at t and rebuild the kinematic bundle from it.
inline KinematicSample phase_at(const PhaseTrack& pt, double t) {
    if (pt.times_s.empty()) throw std::out_of_range("phase_at: empty track");
    if (!(t >= pt.t_first()) || !(t <= pt.t_last())) {
        std::ostringstream os;
        os << "phase_at: t = " << t << " outside track span [" << pt.t_first() << ", "
           << pt.t_last() << "]";
        throw std::out_of_range(os.str());
    }
    const auto it = std::lower_bound(pt.times_s.begin(), pt.times_s.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - pt.times_s.begin());
    if (hi < pt.times_s.size() && pt.times_s[hi] == t) return pt.kinematics[hi];
    const std::size_t i = hi - 1;
    const double h = pt.times_s[i + 1] - pt.times_s[i];
    const double s = (t - pt.times_s[i]) / h;
    const double b0 = pt.kinematics[i].beta, b1 = pt.kinematics[i + 1].beta;
    double beta;
    if (pt.interpolation == InterpKind::linear) {
        beta = b0 + s * (b1 - b0);
    } else {
        const double s2 = s * s, s3 = s2 * s;
        beta = (2.0 * s3 - 3.0 * s2 + 1.0) * b0 + (s3 - 2.0 * s2 + s) * h * pt.slopes_[i] +
               (-2.0 * s3 + 3.0 * s2) * b1 + (s3 - s2) * h * pt.slopes_[i + 1];
    }
    return KinematicSample::make(t, beta, pt.optical);
}

struct PassGeometry {
    double altitude_m = 1.0e6;
    double min_range_m = 1.2e6;
    double max_range_m = 1.5e6;
    double duration_s = 600.0;
    double max_radial_speed_mps = 6000.0;

    void validate() const {
        if (!(altitude_m > 0.0) || !(min_range_m > 0.0) || !(duration_s > 0.0))
            throw validation_error("PassGeometry: lengths and duration must be positive");
        if (!(min_range_m <= max_range_m))
            throw validation_error("PassGeometry: min_range must not exceed max_range");
        if (!(max_radial_speed_mps < 8000.0))
            throw validation_error("PassGeometry: radial speed bound outside LEO envelope");
        if (min_range_m < altitude_m)
            throw validation_error("PassGeometry: min_range below altitude is unreachable");
    }
};

/// Closed-form circular-orbit overhead pass:
///   r(t)   = sqrt(R_e^2 + R_o^2 - 2 R_e R_o cos(alpha) cos(w (t - t_ca)))
/// with R_o = R_e + altitude, w the orbital rate sqrt(GM/R_o^3) and alpha the
/// fixed cross-track angle that makes the closest approach hit min_range.
/// Ground station taken inertial; good enough for a desk-scale substitute.
struct PassModel {
    double orbit_radius_m;
    double omega_rad_s;   // orbital angular rate
    double cos_alpha;
    double t_ca_s;        // closest-approach epoch
    double half_window_s; // track half-duration actually generated

    double range(double t) const {
        const double c = cos_alpha * std::cos(omega_rad_s * (t - t_ca_s));
        return std::sqrt(earth_radius * earth_radius + orbit_radius_m * orbit_radius_m -
                         2.0 * earth_radius * orbit_radius_m * c);
    }
    /// dr/dt: ground-truth radial velocity, positive receding.
    double radial_velocity(double t) const {
        const double s = omega_rad_s * (t - t_ca_s);
        return earth_radius * orbit_radius_m * cos_alpha * omega_rad_s * std::sin(s) /
               range(t);
    }
    /// Reflection epoch of a pulse fired at t: solves t_a = t + r(t_a)/c.
    double reflection_epoch(double t_fire) const {
        double ta = t_fire + range(t_fire) / speed_of_light;
        for (int i = 0; i < 4; ++i) ta = t_fire + range(ta) / speed_of_light;
        return ta;
    }
};

inline PassModel make_pass_model(const PassGeometry& geom) {
    geom.validate();
    PassModel m{};
    m.orbit_radius_m = earth_radius + geom.altitude_m;
    m.omega_rad_s = std::sqrt(earth_gm / (m.orbit_radius_m * m.orbit_radius_m * m.orbit_radius_m));
    const double den = 2.0 * earth_radius * m.orbit_radius_m;
    m.cos_alpha = (earth_radius * earth_radius + m.orbit_radius_m * m.orbit_radius_m -
                   geom.min_range_m * geom.min_range_m) / den;
    if (!(m.cos_alpha > 0.0) || m.cos_alpha > 1.0)
        throw validation_error("make_pass_model: min_range outside the overhead-pass family");
    const double cos_far = (earth_radius * earth_radius + m.orbit_radius_m * m.orbit_radius_m -
                            geom.max_range_m * geom.max_range_m) / den;
    const double ratio = std::clamp(cos_far / m.cos_alpha, -1.0, 1.0);
    const double s_range = std::acos(ratio) / m.omega_rad_s;
    m.half_window_s = std::min(geom.duration_s / 2.0, s_range);
    m.t_ca_s = m.half_window_s;
    return m;
}

/// Ranged samples of a synthetic pass: P_k = 2 r(t_a) with the light-time
/// fixed point solved per pulse; optional Gaussian range noise (default off,
/// ranging is mm-accurate at these scales).
inline RangeTrack synthesize_pass(const PassGeometry& geom, double cadence_s,
                                  std::uint64_t seed, double noise_sigma_m = 0.0) {
    if (!(cadence_s > 0.0)) throw validation_error("synthesize_pass: cadence must be positive");
    const PassModel m = make_pass_model(geom);
    const std::size_t n = static_cast<std::size_t>(std::floor(2.0 * m.half_window_s / cadence_s)) + 1;
    if (n < 2)
        throw validation_error("synthesize_pass: window too short for 2 samples");

    RangeTrack track;
    track.epoch_s = 0.0;
    track.cadence_s = cadence_s;
    track.samples_m.resize(n);
    RandomStream noise(seed, 0, /*salt=*/7);
    for (std::size_t k = 0; k < n; ++k) {
        const double t_fire = track.time_at(k);
        double path = 2.0 * m.range(m.reflection_epoch(t_fire));
        if (noise_sigma_m > 0.0) path += noise_sigma_m * noise.normal();
        track.samples_m[k] = path;
    }
    track.validate();

    // The geometry promises a speed bound; a pass that violates its own
    // envelope is a configuration error, not data.
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (std::abs(estimate_radial_velocity(track, k)) > geom.max_radial_speed_mps) {
            std::ostringstream os;
            os << "synthesize_pass: |v_r| exceeds the geometry bound "
               << geom.max_radial_speed_mps << " m/s at sample " << k;
            throw validation_error(os.str());
        }
    }
    return track;
}

} // namespace satfringe
