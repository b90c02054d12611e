#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <satfringe/photon_sim.hpp>

using namespace satfringe;

namespace {

OpticalConfig stock_cfg() { return OpticalConfig{}; }

DetectorModel stock_det() { return DetectorModel{}; }

/// Constant-beta track long enough for `pulses` pulses at 100 MHz.
PhaseTrack flat_track(double beta, double span_s, const OpticalConfig& cfg) {
    return make_phase_track({0.0, span_s}, {beta, beta}, cfg, InterpKind::linear);
}

/// Linear beta ramp; the unwrapped phase then sweeps turns uniformly.
PhaseTrack ramp_track(double beta0, double beta1, double span_s, const OpticalConfig& cfg) {
    std::vector<double> times, betas;
    for (int k = 0; k <= 20; ++k) {
        const double s = static_cast<double>(k) / 20.0;
        times.push_back(span_s * s);
        betas.push_back(beta0 + (beta1 - beta0) * s);
    }
    return make_phase_track(times, betas, cfg, InterpKind::linear);
}

double fold_delta(double delta_s, double rep_s, double shift_s) {
    double x = std::fmod(delta_s + shift_s, rep_s);
    if (x < 0.0) x += rep_s;
    return x;
}

} // namespace

TEST_CASE("simulate_pass: zero flux and zero background give no events") {
    const auto cfg = stock_cfg();
    const auto pt = flat_track(0.0, 0.02, cfg);
    LinkModel link;
    link.mu_received = 0.0;
    const auto events = simulate_pass(pt, cfg, link, stock_det(), 1.0, {0.0, 0.01}, 1);
    CHECK(events.empty());
}

TEST_CASE("simulate_pass: stationary mirror sends nothing to the central peak") {
    const auto cfg = stock_cfg();
    const auto pt = flat_track(0.0, 0.02, cfg);
    LinkModel link;
    link.mu_received = 1e-3;
    link.eta_optics = 1.0;
    link.detector_efficiency = 1.0;
    // 10^6 pulses at 100 MHz
    const auto events = simulate_pass(pt, cfg, link, stock_det(), 1.0, {0.0, 0.01}, 77);

    std::size_t n_central = 0, n_lateral = 0;
    for (const auto& ev : events) {
        CHECK(ev.truth != TruthTag::background);
        if (ev.truth == TruthTag::central) ++n_central;
        else ++n_lateral;
    }
    CHECK(n_central == 0); // w_central = 0 exactly at phi = 0, V = 1
    // p_det = 1e-3 * 1/4 over 1e6 pulses: 250 expected, 5 sigma slack.
    CHECK(static_cast<double>(n_lateral) > 250.0 - 5.0 * std::sqrt(250.0));
    CHECK(static_cast<double>(n_lateral) < 250.0 + 5.0 * std::sqrt(250.0));
}

TEST_CASE("simulate_pass: detection rate stays inside the weight envelope") {
    const auto cfg = stock_cfg();
    const auto pt = ramp_track(-2e-5, 2e-5, 2.0, cfg);
    LinkModel link;
    link.mu_received = 1e-4;
    link.eta_optics = 0.27;
    const auto events = simulate_pass(pt, cfg, link, stock_det(), 1.0, {0.0, 2.0}, 5, 4);

    const double pulses = 2.0 / cfg.rep_period_s;
    const double lo = link.throughput() * 0.25 * pulses; // (1/2 - V/4) floor
    const double hi = link.throughput() * 0.75 * pulses; // (1/2 + V/4) cap
    const double mid = link.throughput() * 0.5 * pulses; // uniform-phase mean
    const double n = static_cast<double>(events.size());
    CHECK(n > lo);
    CHECK(n < hi);
    CHECK_THAT(n, Catch::Matchers::WithinAbs(mid, 5.0 * std::sqrt(mid)));
}

TEST_CASE("simulate_pass: truth-tagged peaks sit at 0, dt', 2dt'") {
    const auto cfg = stock_cfg();
    const double beta = 1.9e-5;
    const auto pt = flat_track(beta, 1.0, cfg);
    LinkModel link;
    link.mu_received = 4e-4;
    link.eta_optics = 1.0;
    const auto det = stock_det();
    const auto events = simulate_pass(pt, cfg, link, det, 1.0, {0.0, 0.9}, 21);
    REQUIRE(events.size() > 3000);

    const double rep = cfg.rep_period_s;
    const double shift = 1.5e-9;
    const double dt_prime = doppler_stretch(cfg.mzi_delay_s, beta);
    std::map<TruthTag, std::pair<double, std::size_t>> acc;
    for (const auto& ev : events) {
        CHECK(std::abs(ev.delta_s) <= rep / 2.0 + 1e-15);
        CHECK(ev.delta_s == ev.t_meas_s - ev.t_ref_s);
        auto& [sum, cnt] = acc[ev.truth];
        sum += fold_delta(ev.delta_s, rep, shift);
        ++cnt;
    }
    const double expected[3] = {shift, shift + dt_prime, shift + 2.0 * dt_prime};
    const TruthTag tags[3] = {TruthTag::early, TruthTag::central, TruthTag::late};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(acc.count(tags[i]) == 1);
        const auto [sum, cnt] = acc[tags[i]];
        REQUIRE(cnt > 200);
        const double tol = 5.0 * det.jitter_sigma_s / std::sqrt(static_cast<double>(cnt)) + 1e-12;
        CHECK_THAT(sum / static_cast<double>(cnt),
                   Catch::Matchers::WithinAbs(expected[i], tol));
    }
}

TEST_CASE("simulate_pass: washout over many phase turns pools to one half") {
    const auto cfg = stock_cfg();
    // ~150 full turns across the window: any selection-free pooling washes out.
    const auto pt = ramp_track(-2e-5, 2e-5, 2.0, cfg);
    LinkModel link;
    link.mu_received = 1e-4;
    link.eta_optics = 0.27;
    const auto events = simulate_pass(pt, cfg, link, stock_det(), 1.0, {0.0, 2.0}, 31);

    double n_c = 0.0, n_l = 0.0;
    for (const auto& ev : events) (ev.truth == TruthTag::central ? n_c : n_l) += 1.0;
    REQUIRE(n_l > 0.0);
    const double p = n_c / (2.0 * n_l);
    const double sigma = p * std::sqrt(1.0 / n_c + 1.0 / n_l);
    CHECK_THAT(p, Catch::Matchers::WithinAbs(0.5, 3.0 * sigma));
}

TEST_CASE("simulate_pass: TDC grid") {
    const auto cfg = stock_cfg();
    const auto pt = flat_track(1e-5, 0.2, cfg);
    LinkModel link;
    link.mu_received = 5e-4;
    const auto det = stock_det();
    const auto events = simulate_pass(pt, cfg, link, det, 1.0, {0.0, 0.2}, 3);
    REQUIRE(!events.empty());
    for (const auto& ev : events) {
        const double k = std::llround(ev.t_meas_s / det.tdc_resolution_s);
        CHECK(ev.t_meas_s == k * det.tdc_resolution_s);
    }
}

TEST_CASE("simulate_pass: background only is Poisson and uniform in delta") {
    const auto cfg = stock_cfg();
    const auto pt = flat_track(0.0, 1.0, cfg);
    LinkModel link;
    link.mu_received = 0.0;
    DetectorModel det = stock_det();
    det.background_rate_hz = 5000.0;
    const auto events = simulate_pass(pt, cfg, link, det, 1.0, {0.0, 1.0}, 11);

    const double expected = 5000.0;
    CHECK_THAT(static_cast<double>(events.size()),
               Catch::Matchers::WithinAbs(expected, 5.0 * std::sqrt(expected)));

    // Chi-square uniformity of delta over 10 bins, 1% critical (df=9) = 21.67.
    const double rep = cfg.rep_period_s;
    std::vector<double> counts(10, 0.0);
    for (const auto& ev : events) {
        CHECK(ev.truth == TruthTag::background);
        const double x = fold_delta(ev.delta_s, rep, rep / 2.0) / rep;
        counts[std::min<std::size_t>(9, static_cast<std::size_t>(x * 10.0))] += 1.0;
    }
    const double e = static_cast<double>(events.size()) / 10.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 21.67);
}

TEST_CASE("simulate_pass: bitwise determinism, including across thread counts") {
    const auto cfg = stock_cfg();
    const auto pt = ramp_track(-1e-5, 2e-5, 1.0, cfg);
    LinkModel link;
    link.mu_received = 2e-4;
    DetectorModel det = stock_det();
    det.background_rate_hz = 200.0;

    const auto a = simulate_pass(pt, cfg, link, det, 0.8, {0.0, 1.0}, 99, 1);
    const auto b = simulate_pass(pt, cfg, link, det, 0.8, {0.0, 1.0}, 99, 4);
    const auto c = simulate_pass(pt, cfg, link, det, 0.8, {0.0, 1.0}, 99, 3);
    const auto d = simulate_pass(pt, cfg, link, det, 0.8, {0.0, 1.0}, 100, 1);

    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == c.size());
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].t_ref_s == b[i].t_ref_s && a[i].t_meas_s == b[i].t_meas_s &&
               a[i].delta_s == b[i].delta_s && a[i].truth == b[i].truth;
        same = same && a[i].t_meas_s == c[i].t_meas_s && a[i].truth == c[i].truth;
    }
    CHECK(same);
    bool differs = d.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].t_meas_s != d[i].t_meas_s;
    CHECK(differs);
}

TEST_CASE("simulate_pass: input validation") {
    const auto cfg = stock_cfg();
    const auto pt = flat_track(0.0, 1.0, cfg);
    LinkModel link;
    link.mu_received = 1e-4;
    const auto det = stock_det();

    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, det, -0.1, {0.0, 1.0}, 1), validation_error);
    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, det, 1.1, {0.0, 1.0}, 1), validation_error);
    // vis_degradation = 0 is the legitimate no-interference limit.
    CHECK_NOTHROW(simulate_pass(pt, cfg, link, det, 0.0, {0.0, 0.01}, 1));
    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, det, 1.0, {-0.1, 1.0}, 1), validation_error);
    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, det, 1.0, {0.0, 1.1}, 1), validation_error);
    // Window between two grid points: no pulse to transmit.
    const double rep = cfg.rep_period_s;
    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, det, 1.0,
                                  {100.0 * rep + 0.2 * rep, 100.0 * rep + 0.8 * rep}, 1),
                    validation_error);

    LinkModel bad = link;
    bad.mu_received = -1.0;
    CHECK_THROWS_AS(simulate_pass(pt, cfg, bad, det, 1.0, {0.0, 1.0}, 1), validation_error);
    DetectorModel bad_det = det;
    bad_det.tdc_resolution_s = 0.0;
    CHECK_THROWS_AS(simulate_pass(pt, cfg, link, bad_det, 1.0, {0.0, 1.0}, 1), validation_error);
}

TEST_CASE("multi-photon regime flag") {
    LinkModel link;
    link.mu_received = 7e-4;
    link.eta_optics = 0.27;
    CHECK_FALSE(link.multi_photon_regime());
    link.mu_received = 0.5;
    CHECK(link.multi_photon_regime());
}

TEST_CASE("event_phase_tag: wrap convention and range checks") {
    const auto cfg = stock_cfg();
    const auto pt = ramp_track(-2e-5, 2e-5, 2.0, cfg);

    // Hand-built events at knot times with known phases.
    std::vector<DetectionEvent> events;
    events.push_back({pt.times_s[3], pt.times_s[3], 0.0, TruthTag::early});
    const auto tagged = event_phase_tag(events, pt);
    REQUIRE(tagged.size() == 1);
    double expect = std::fmod(pt.kinematics[3].phase_rad, two_pi);
    if (expect < 0.0) expect += two_pi;
    CHECK(tagged[0].phase_rad == expect);
    CHECK(tagged[0].phase_rad >= 0.0);
    CHECK(tagged[0].phase_rad < two_pi);

    events.push_back({pt.t_last() + 1.0, 0.0, 0.0, TruthTag::early});
    events.push_back({pt.t_first() - 1.0, 0.0, 0.0, TruthTag::early});
    try {
        event_phase_tag(events, pt);
        FAIL("expected out_of_range");
    } catch (const std::out_of_range& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);
    }
}

TEST_CASE("event_phase_tag: negative unwrapped phase wraps into [0, 2pi)") {
    const auto cfg = stock_cfg();
    // Tiny negative beta: unwrapped phase is a small negative number.
    const double beta = -1e-9;
    const auto pt = flat_track(beta, 1.0, cfg);
    std::vector<DetectionEvent> events{{0.5, 0.5, 0.0, TruthTag::central}};
    const auto tagged = event_phase_tag(events, pt);
    const double phi = kinematic_phase(beta, cfg);
    REQUIRE(phi < 0.0);
    CHECK_THAT(tagged[0].phase_rad, Catch::Matchers::WithinRel(two_pi + phi, 1e-9));
}

TEST_CASE("event_phase_tag: uniform sweep covers the circle uniformly") {
    const auto cfg = stock_cfg();
    const auto pt = ramp_track(-2e-5, 2e-5, 2.0, cfg);
    // Uniform time grid over a linear-phase pass; detections themselves are
    // cosine-modulated by design, so the map is probed with unweighted epochs.
    std::vector<DetectionEvent> events;
    for (int k = 0; k < 200000; ++k)
        events.push_back({k * 1e-5, k * 1e-5, 0.0, TruthTag::early});
    const auto tagged = event_phase_tag(events, pt);
    REQUIRE(tagged.size() == events.size());

    // 20 bins, df = 19, 1% critical value 36.19.
    std::vector<double> counts(20, 0.0);
    for (const auto& te : tagged)
        counts[std::min<std::size_t>(19, static_cast<std::size_t>(te.phase_rad / two_pi * 20.0))] += 1.0;
    const double e = static_cast<double>(tagged.size()) / 20.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 36.19);
}
