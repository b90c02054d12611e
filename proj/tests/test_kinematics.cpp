#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <satfringe/kinematics.hpp>

using namespace satfringe;

namespace {

OpticalConfig stock_cfg() { return OpticalConfig{}; } // defaults are the flight parameters

// Independent small-beta reference: phi ~ 4 pi v dt / lambda.
double first_order_phase(double v_mps, const OpticalConfig& cfg) {
    return 4.0 * pi * v_mps * cfg.mzi_delay_s / cfg.wavelength_vacuum_m;
}

} // namespace

TEST_CASE("kinematic phase: rest case and sign structure") {
    const auto cfg = stock_cfg();
    CHECK(kinematic_phase(0.0, cfg) == 0.0);
    CHECK(kinematic_phase(2e-5, cfg) > 0.0);
    CHECK(kinematic_phase(-2e-5, cfg) < 0.0);
}

TEST_CASE("kinematic phase at 6 km/s matches the first-order estimate") {
    const auto cfg = stock_cfg();
    const double v = 6000.0;
    const double beta = v / speed_of_light;
    const double phi = kinematic_phase(beta, cfg);

    // Exact relation: phi * (1 + beta) == first-order phase.
    CHECK_THAT(phi * (1.0 + beta),
               Catch::Matchers::WithinRel(first_order_phase(v, cfg), 1e-13));
    // Magnitude anchor: a few hundred radians for LEO speeds.
    CHECK_THAT(phi, Catch::Matchers::WithinAbs(481.858, 0.005));
}

TEST_CASE("kinematic phase first-order bound holds across the domain") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1e-4, 1e-4);
    const auto cfg = stock_cfg();
    for (int i = 0; i < 1000; ++i) {
        double beta = u(rng);
        if (beta == 0.0) beta = 1e-9;
        const double phi = kinematic_phase(beta, cfg);
        const double fo = first_order_phase(beta * speed_of_light, cfg);
        CHECK(std::abs(phi - fo) / std::abs(phi) < 2.0 * std::abs(beta));
    }
}

TEST_CASE("kinematic phase rejects out-of-domain beta") {
    const auto cfg = stock_cfg();
    CHECK_THROWS_AS(kinematic_phase(1e-3, cfg), std::domain_error);
    CHECK_THROWS_AS(kinematic_phase(-5e-3, cfg), std::domain_error);
    CHECK_THROWS_WITH(kinematic_phase(2e-3, cfg),
                      Catch::Matchers::ContainsSubstring("beta"));
}

TEST_CASE("theoretical visibility: frozen reference points") {
    const auto cfg = stock_cfg();
    // Flight config, beta = 3e-5: deficit ~9.5e-6.
    CHECK_THAT(theoretical_visibility(3e-5, cfg),
               Catch::Matchers::WithinAbs(1.0 - 9.4886e-6, 2e-10));
    CHECK(theoretical_visibility(0.0, cfg) == 1.0);

    // Delay/coherence ratio 100 at the same speed: still > 0.9999.
    OpticalConfig wide = cfg;
    wide.coherence_time_s = cfg.mzi_delay_s / 100.0;
    CHECK_THAT(theoretical_visibility(3e-5, wide),
               Catch::Matchers::WithinAbs(0.99994346, 1e-7));

    // Symmetric in the (beta -> -beta, measured through 1+beta) sense:
    // V(-b) corresponds to a slightly larger stretch, so V(-b) < V(b) for b>0.
    CHECK(theoretical_visibility(-3e-5, cfg) < theoretical_visibility(3e-5, cfg));
}

TEST_CASE("central-peak probability bounds and rest value") {
    const auto cfg = stock_cfg();
    CHECK(p_central_closed_form(0.0, cfg) == 0.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-9e-4, 9e-4);
    for (int i = 0; i < 1000; ++i) {
        const double p = p_central_closed_form(u(rng), cfg);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("raw peak weights conserve probability across both ports") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uphi(0.0, two_pi);
    std::uniform_real_distribution<double> uv(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const auto w = peak_weights(uphi(rng), uv(rng));
        CHECK(w.early == 0.125);
        CHECK(w.late == 0.125);
        CHECK(w.central >= 0.0);
        CHECK(w.central <= 0.5);
        CHECK_THAT(w.sum() + w.unmonitored(), Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
    // Fully constructive central fringe at phi = pi, V = 1.
    CHECK_THAT(peak_weights(pi, 1.0).central, Catch::Matchers::WithinAbs(0.5, 1e-15));
    // Dark fringe at phi = 0, V = 1.
    CHECK_THAT(peak_weights(0.0, 1.0).central, Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("doppler factor: reciprocal under velocity reversal") {
    for (double beta : {1e-6, 2.0014e-5, 3e-5, 9e-4}) {
        CHECK_THAT(doppler_factor(beta) * doppler_factor(-beta),
                   Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("doppler stretch of the ranging interval at 6 km/s") {
    const double beta = 6000.0 / speed_of_light;
    const double dT = 0.1; // SLR cadence
    const double stretched = doppler_stretch(dT, beta);
    // Interval grows by ~4.0 microseconds.
    CHECK_THAT(stretched - dT, Catch::Matchers::WithinAbs(4.00285e-6, 1e-10));
    // Identity at rest.
    CHECK(doppler_stretch(dT, 0.0) == dT);
}

TEST_CASE("boost parameter bundle is internally consistent") {
    for (double beta : {-9e-4, -3e-5, 0.0, 2e-5, 9e-4}) {
        const auto b = BoostParams::from_beta(beta, 1.2e6);
        CHECK_THAT(b.gamma * b.gamma * (1.0 - beta) * (1.0 - beta),
                   Catch::Matchers::WithinRel(b.f_beta, 1e-14));
        CHECK_THAT(b.t_rtt_s,
                   Catch::Matchers::WithinRel(2.0 * 1.2e6 / (speed_of_light * (1.0 - beta)), 1e-15));
    }
}

TEST_CASE("kinematic sample bundles the closed forms") {
    const auto cfg = stock_cfg();
    const auto s = KinematicSample::make(12.5, 2e-5, cfg);
    CHECK(s.t_s == 12.5);
    CHECK(s.beta == 2e-5);
    CHECK(s.phase_rad == kinematic_phase(2e-5, cfg));
    CHECK(s.visibility == theoretical_visibility(2e-5, cfg));
    CHECK_THAT(s.p_central, Catch::Matchers::WithinAbs(p_central_closed_form(2e-5, cfg), 1e-15));
}
