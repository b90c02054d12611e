#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <satfringe/histogram.hpp>
#include <satfringe/peak_fit.hpp>
#include <satfringe/rng.hpp>

using namespace satfringe;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Events with deltas drawn around 0, spacing, 2*spacing (the three-peak
/// geometry) under Gaussian jitter.  Only delta_s matters to the histogram.
std::vector<DetectionEvent> cluster_events(const std::array<std::uint64_t, 3>& n,
                                           double spacing_s, double sigma_s,
                                           std::uint64_t seed) {
    RandomStream rs(seed, 0, 99);
    const TruthTag tags[3] = {TruthTag::early, TruthTag::central, TruthTag::late};
    std::vector<DetectionEvent> ev;
    for (int peak = 0; peak < 3; ++peak)
        for (std::uint64_t i = 0; i < n[peak]; ++i) {
            DetectionEvent e{};
            e.delta_s = static_cast<double>(peak) * spacing_s + sigma_s * rs.normal();
            e.truth = tags[peak];
            ev.push_back(e);
        }
    return ev;
}

TriGaussFit hand_fit(double nc, double ec, double nl, double el) {
    TriGaussFit f;
    f.converged = true;
    f.n_central.value = nc;
    f.n_central.err = ec;
    f.n_lateral.value = nl;
    f.n_lateral.err = el;
    return f;
}

} // namespace

TEST_CASE("build_histogram: no events give zero counts on the instrument grid") {
    const auto h = build_histogram({}, 81e-12, 10e-9);
    CHECK(h.counts.size() == 123); // 81 ps does not divide 10 ns
    CHECK(h.total() == 0);
    CHECK_THAT(h.window_s, WithinRel(123 * 81e-12, 1e-12));
    CHECK_THAT(h.origin_s, WithinRel(1.5e-9, 1e-12));
}

TEST_CASE("build_histogram: rejects bad bin geometry") {
    CHECK_THROWS_AS(build_histogram({}, 0.0, 10e-9), validation_error);
    CHECK_THROWS_AS(build_histogram({}, -81e-12, 10e-9), validation_error);
    CHECK_THROWS_AS(build_histogram({}, 1e-9, 0.5e-9), validation_error);
}

TEST_CASE("build_histogram: every event lands in exactly one bin") {
    RandomStream rs(5, 0, 99);
    std::vector<DetectionEvent> ev(10000);
    for (auto& e : ev) e.delta_s = (rs.uniform() - 0.5) * 10e-9; // full re-anchor range
    const auto h = build_histogram(ev, 81e-12, 10e-9);
    CHECK(h.total() == ev.size());

    // Fold boundary cases: origin shift maps -1.5 ns to the left edge, and a
    // delta just below it wraps to the top of the window instead of escaping.
    std::vector<DetectionEvent> edge(2);
    edge[0].delta_s = -1.5e-9;
    edge[1].delta_s = -1.5e-9 - 1e-12;
    const auto he = build_histogram(edge, 81e-12, 10e-9);
    CHECK(he.total() == 2);
    CHECK(he.counts.front() == 1);
    CHECK(he.counts.back() == 1);
}

TEST_CASE("build_histogram: three jittered clusters reproduce their offsets") {
    const double spacing = 3.4e-9, sigma = 0.5e-9;
    const auto ev = cluster_events({2000, 2000, 2000}, spacing, sigma, 101);
    const auto h = build_histogram(ev, 81e-12, 10e-9);
    CHECK(h.total() == 6000);

    // Sample mean of the binned data around each nominal folded center must
    // match it within 3 standard errors (spec example).
    const double nominal[3] = {1.5e-9, 1.5e-9 + spacing, 1.5e-9 + 2 * spacing};
    for (double c0 : nominal) {
        double sum = 0.0, sum2 = 0.0, n = 0.0;
        for (std::size_t k = 0; k < h.counts.size(); ++k) {
            const double x = h.bin_center(k);
            if (std::abs(x - c0) > 1.2e-9) continue; // +-2.4 sigma, symmetric
            const double w = static_cast<double>(h.counts[k]);
            sum += w * x;
            sum2 += w * x * x;
            n += w;
        }
        REQUIRE(n > 1500.0);
        const double mean = sum / n;
        const double sd = std::sqrt(sum2 / n - mean * mean);
        CHECK_THAT(mean, WithinAbs(c0, 3.0 * sd / std::sqrt(n)));
    }
}

TEST_CASE("fit_tri_gaussian: noiseless curve recovered to 1e-6 relative") {
    DeltaHistogram h;
    h.bin_width_s = 81e-12;
    h.counts.resize(123);
    h.window_s = 123 * 81e-12;
    h.origin_s = 1.5e-9;
    const double A[3] = {8.0e6, 1.3e7, 6.0e6};
    const double c[3] = {1.5e-9, 4.9e-9, 8.3e-9};
    const double sig = 0.5e-9;
    // Bin contents are the exact per-bin Gaussian integrals (the fit's own
    // model); amplitudes ~1e7 keep integer rounding below 1e-7 relative.
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double lo = (h.bin_left(k) - c[i]) / (sig * std::sqrt(2.0));
            const double hi = (h.bin_left(k) + h.bin_width_s - c[i]) / (sig * std::sqrt(2.0));
            v += A[i] * sig * std::sqrt(pi / 2.0) * (std::erf(hi) - std::erf(lo)) /
                 h.bin_width_s;
        }
        h.counts[k] = static_cast<std::uint64_t>(std::llround(v));
    }

    const auto fit = fit_tri_gaussian(h, 3.4e-9);
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.degenerate);
    for (int i = 0; i < 3; ++i) {
        CHECK_THAT(fit.amplitudes[i], WithinRel(A[i], 1e-6));
        CHECK_THAT(fit.centers_s[i], WithinRel(c[i], 1e-6));
    }
    CHECK_THAT(fit.sigma_s, WithinRel(sig, 1e-6));
    CHECK(fit.baseline < 1e-6 * A[1]); // true zero: bound relative to scale
    CHECK(fit.residual_norm < 2.0);    // integer rounding only
    CHECK(fit.centers_s[0] < fit.centers_s[1]);
    CHECK(fit.centers_s[1] < fit.centers_s[2]);
    CHECK_THAT(fit.n_central.value,
               WithinRel(A[1] * sig * std::sqrt(2.0 * pi) / h.bin_width_s, 1e-6));
    CHECK_THAT(fit.n_lateral.value,
               WithinRel((A[0] + A[2]) * sig * std::sqrt(2.0 * pi) / h.bin_width_s, 1e-6));
}

TEST_CASE("fit_tri_gaussian: recovers generation truth at N_c=196, N_l=112") {
    const auto ev = cluster_events({56, 196, 56}, 3.4e-9, 0.5e-9, 20260815);
    const auto fit =
        fit_tri_gaussian(build_histogram(ev, default_fit_bin_s, 10e-9), 3.4e-9);
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.degenerate);

    CHECK(fit.centers_s[0] < fit.centers_s[1]);
    CHECK(fit.centers_s[1] < fit.centers_s[2]);
    CHECK_THAT(fit.centers_s[1] - fit.centers_s[0], WithinAbs(3.4e-9, 0.2e-9));
    CHECK_THAT(fit.centers_s[2] - fit.centers_s[1], WithinAbs(3.4e-9, 0.2e-9));
    CHECK_THAT(fit.sigma_s, WithinAbs(0.5e-9, 0.15e-9));

    // Counts consistent with the generation truth within one (quadrature
    // combined) error bar; error flavors obey their definitions.
    CHECK(fit.n_central.value >= 0.0);
    CHECK(fit.n_lateral.value >= 0.0);
    CHECK(std::abs(fit.n_central.value - 196.0) <= fit.n_central.err_combined);
    CHECK(std::abs(fit.n_lateral.value - 112.0) <= fit.n_lateral.err_combined);
    CHECK_THAT(fit.n_central.err_poisson,
               WithinRel(std::sqrt(fit.n_central.value), 1e-12));
    CHECK(fit.n_central.err == fit.n_central.err_cov);
    CHECK_THAT(fit.n_central.err_combined,
               WithinRel(std::hypot(fit.n_central.err_cov, fit.n_central.err_poisson), 1e-12));
    CHECK(fit.n_central.err_cov > 5.0);
    CHECK(fit.n_central.err_cov < 30.0);
    CHECK(fit.n_lateral.err_cov > 4.0);
    CHECK(fit.n_lateral.err_cov < 25.0);

    // Conservation: fitted areas cannot exceed the histogram population.
    const double total = static_cast<double>(ev.size());
    CHECK(fit.n_central.value + fit.n_lateral.value <= total + 3.0 * std::sqrt(total));

    const auto p = p_c_experimental(fit);
    CHECK_THAT(p.value, WithinAbs(0.875, 0.22)); // ~2 sigma around N_c/(2N_l)
    CHECK(p.err > 0.05);
    CHECK(p.err < 0.25);
}

TEST_CASE("fit_tri_gaussian: side-peaks-only data pins central amplitude at zero") {
    const auto ev = cluster_events({2500, 0, 2500}, 3.4e-9, 0.5e-9, 7);
    const auto fit = fit_tri_gaussian(build_histogram(ev, 81e-12, 10e-9), 3.4e-9);
    REQUIRE(fit.converged);
    CHECK(fit.amplitudes[1] >= 0.0); // bounded, never negative
    CHECK(fit.n_central.value >= 0.0);
    CHECK(fit.n_central.value < 15.0); // 0.3% of 5000 events
    CHECK_THAT(fit.n_lateral.value, WithinAbs(5000.0, 5.0 * std::sqrt(5000.0)));
}

TEST_CASE("fit_tri_gaussian: refuses sparse or invalid input") {
    CHECK_THROWS_AS(fit_tri_gaussian(DeltaHistogram{}, 3.4e-9), fit_refused);

    const auto ev = cluster_events({10, 9, 10}, 3.4e-9, 0.5e-9, 3);
    const auto h = build_histogram(ev, 81e-12, 10e-9);
    CHECK(h.total() == 29);
    CHECK_THROWS_AS(fit_tri_gaussian(h, 3.4e-9), fit_refused);
    CHECK_THROWS_AS(fit_tri_gaussian(h, 0.0), validation_error);
}

TEST_CASE("fit_tri_gaussian: merged peaks are flagged degenerate") {
    // Spacing 0.6 ns under 0.5 ns jitter: the triplet blends into one blob.
    const auto ev = cluster_events({3000, 6000, 3000}, 0.6e-9, 0.5e-9, 11);
    const auto fit = fit_tri_gaussian(build_histogram(ev, 81e-12, 10e-9), 0.6e-9);
    CHECK(fit.degenerate);
}

TEST_CASE("p_c_experimental: field-scale count pairs map to the expected ratios") {
    // N_c = 196+-14, N_l = 112+-11 -> 0.87 +- 0.10
    const auto a = p_c_experimental(hand_fit(196, 14, 112, 11));
    CHECK_THAT(a.value, WithinAbs(0.87, 0.006));
    CHECK_THAT(a.err, WithinAbs(0.10, 0.007));

    // N_c = 46+-7, N_l = 112+-11 -> 0.20 +- 0.03
    const auto b = p_c_experimental(hand_fit(46, 7, 112, 11));
    CHECK_THAT(b.value, WithinAbs(0.20, 0.006));
    CHECK_THAT(b.err, WithinAbs(0.03, 0.008));

    // N_c = 1245+-35, N_l = 1306+-36 -> ~0.48, compatible with 1/2
    const auto c = p_c_experimental(hand_fit(1245, 35, 1306, 36));
    CHECK_THAT(c.value, WithinAbs(0.48, 0.005));
    CHECK(std::abs(c.value - 0.5) < 2.0 * c.err);
}

TEST_CASE("p_c_experimental: refuses unusable fits") {
    auto f = hand_fit(196, 14, 112, 11);
    f.converged = false;
    CHECK_THROWS_AS(p_c_experimental(f), numerical_error);

    CHECK_THROWS_AS(p_c_experimental(hand_fit(196, 14, 0, 0)), numerical_error);
}
