#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "histogram.hpp"
#include "levmar.hpp"

namespace satfringe {

// Tri-Gaussian peak fit: counts(x) ~ b + sum_i A_i exp(-(x-c_i)^2/(2 s^2)),
// one shared width (the detector jitter dominates all three peaks), Poisson
// weights 1/max(count,1).  Peak areas over the bin width give the central
// and lateral counts N_c, N_l.

struct CountEstimate {
    double value = 0.0;
    double err = 0.0;          // primary flavor, = err_cov
    double err_poisson = 0.0;  // sqrt(N)
    double err_cov = 0.0;      // fit-covariance propagation
    double err_combined = 0.0; // quadrature of the two above
};

struct TriGaussFit {
    std::array<double, 3> centers_s{};
    double sigma_s = 0.0;
    std::array<double, 3> amplitudes{};
    double baseline = 0.0;
    CountEstimate n_central;
    CountEstimate n_lateral;
    bool converged = false;
    bool degenerate = false; // any center spacing < 2 sigma
    double residual_norm = 0.0;
    int iterations = 0;
    double chi2 = 0.0;
    std::size_t n_bins = 0;
    double bin_width_s = 0.0;
    std::array<std::array<double, 8>, 8> covariance{};
};

namespace detail {

// Tri-Gaussian bin model, parameter layout [A1, A2, A3, c1, c2, c3, sigma, b].
// Counts are the Gaussian integrated across the bin (erf form), not the
// density sampled at the bin center: at bin widths comparable to sigma the
// center-sample model systematically misshapes the peaks.  A_i keeps its
// peak-height meaning; the Delta -> 0 limit is A_i exp(-d^2/2 sigma^2) + b.
struct TriGaussBinModel {
    double bin_width; // same unit as x

    double operator()(double x, const std::array<double, 8>& p,
                      std::array<double, 8>& grad) const {
        const double s = p[6];
        const double inv_s2 = 1.0 / (s * std::sqrt(2.0));
        double f = p[7];
        grad[7] = 1.0;
        grad[6] = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double lo = x - bin_width / 2.0 - p[3 + i];
            const double hi = x + bin_width / 2.0 - p[3 + i];
            const double g_lo = std::exp(-lo * lo / (2.0 * s * s));
            const double g_hi = std::exp(-hi * hi / (2.0 * s * s));
            // (1/Delta) int_bin exp(-t^2/2s^2) dt
            const double mean_g = s * std::sqrt(pi / 2.0) *
                                  (std::erf(hi * inv_s2) - std::erf(lo * inv_s2)) / bin_width;
            f += p[i] * mean_g;
            grad[i] = mean_g;
            grad[3 + i] = p[i] * (g_lo - g_hi) / bin_width;
            grad[6] += p[i] * (mean_g - (hi * g_hi - lo * g_lo) / bin_width) / s;
        }
        return f;
    }
};

inline double percentile_count(const std::vector<std::uint64_t>& counts, double q) {
    std::vector<std::uint64_t> sorted = counts;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
    return static_cast<double>(sorted[idx]);
}

/// Height proxy at position x: the largest bin within +-1 bin of x.
inline double local_height(const DeltaHistogram& h, double x) {
    const std::int64_t k = static_cast<std::int64_t>(std::floor(x / h.bin_width_s));
    double best = 0.0;
    for (std::int64_t j = k - 1; j <= k + 1; ++j)
        if (j >= 0 && j < static_cast<std::int64_t>(h.counts.size()))
            best = std::max(best, static_cast<double>(h.counts[static_cast<std::size_t>(j)]));
    return best;
}

} // namespace detail

/// Weighted tri-Gaussian fit of a delta histogram.  `delay_hint_s` is the
/// expected peak spacing (the Doppler-stretched interferometer delay).
inline TriGaussFit fit_tri_gaussian(const DeltaHistogram& hist, double delay_hint_s) {
    if (hist.counts.empty()) throw fit_refused("fit_tri_gaussian: empty histogram");
    if (!(delay_hint_s > 0.0))
        throw validation_error("fit_tri_gaussian: delay hint must be positive");
    const std::uint64_t total = hist.total();
    if (total < 30) {
        std::ostringstream os;
        os << "fit_tri_gaussian: " << total << " counts < 30, too sparse to fit";
        throw fit_refused(os.str());
    }

    // The fit runs in nondimensional coordinates (time in ns, counts in units
    // of the tallest bin): raw seconds-vs-counts scales put ~1e16 dynamic
    // range into the normal matrix, past what double elimination resolves.
    // Weights carry y_scale^2 so the cost stays the raw-count chi^2.
    const double x_scale = 1e-9;
    double y_scale = 1.0;
    for (auto c : hist.counts) y_scale = std::max(y_scale, static_cast<double>(c));

    std::vector<double> xs(hist.counts.size()), ys(hist.counts.size()), ws(hist.counts.size());
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        const double y = static_cast<double>(hist.counts[k]);
        xs[k] = hist.bin_center(k) / x_scale;
        ys[k] = y / y_scale;
        ws[k] = y_scale * y_scale / std::max(y, 1.0);
    }

    // Global-peak scan: the tallest bin is one of the three peaks; try all
    // three hypotheses and keep the one whose predicted triplet finds the
    // most counts.
    std::size_t k_max = 0;
    for (std::size_t k = 1; k < hist.counts.size(); ++k)
        if (hist.counts[k] > hist.counts[k_max]) k_max = k;
    const double x_max = hist.bin_center(k_max);
    double best_score = -1.0, hint0 = x_max;
    for (int j = 0; j < 3; ++j) {
        const double c1 = x_max - static_cast<double>(j) * delay_hint_s;
        if (c1 < 0.0 || c1 + 2.0 * delay_hint_s > hist.window_s) continue;
        double score = 0.0;
        for (int i = 0; i < 3; ++i) score += detail::local_height(hist, c1 + i * delay_hint_s);
        if (score > best_score) {
            best_score = score;
            hint0 = c1;
        }
    }

    const double baseline0 = detail::percentile_count(hist.counts, 0.10);
    std::array<double, 8> p0{};
    for (int i = 0; i < 3; ++i) {
        const double c_i = hint0 + static_cast<double>(i) * delay_hint_s;
        p0[3 + i] = c_i / x_scale;
        p0[i] = std::max(detail::local_height(hist, c_i) - baseline0, 1.0) / y_scale;
    }
    p0[6] = 0.5e-9 / x_scale;
    p0[7] = baseline0 / y_scale;

    const double sigma_floor = hist.bin_width_s / 2.0 / x_scale;
    const double window = hist.window_s / x_scale;
    // Each center is confined to a slot of +-delay/2 around its nominal
    // position: the slots pin peak identity (index 1 stays the interfering
    // peak).  Without them an empty peak's Gaussian is free to chase stray
    // counts anywhere in the window with an arbitrarily large amplitude.
    std::array<double, 3> c_lo{}, c_hi{};
    for (int i = 0; i < 3; ++i) {
        const double c_i = (hint0 + static_cast<double>(i) * delay_hint_s) / x_scale;
        const double half_slot = 0.5 * delay_hint_s / x_scale;
        c_lo[i] = std::max(0.0, c_i - half_slot);
        c_hi[i] = std::min(window, c_i + half_slot);
        if (!(c_lo[i] < c_hi[i])) {
            c_lo[i] = 0.0;
            c_hi[i] = window;
        }
    }
    auto clamp = [&](std::array<double, 8>& p) {
        for (int i = 0; i < 3; ++i) p[i] = std::max(p[i], 0.0);
        for (int i = 0; i < 3; ++i) p[3 + i] = std::clamp(p[3 + i], c_lo[i], c_hi[i]);
        p[6] = std::clamp(p[6], sigma_floor, window);
        p[7] = std::max(p[7], 0.0);
    };

    const detail::TriGaussBinModel model{hist.bin_width_s / x_scale};
    auto res = levmar_fit<8>(model, clamp, xs, ys, ws, p0);

    // Back to SI seconds and raw counts; covariance maps through the same
    // diagonal scaling, Cov(p) = T Cov(p') T.
    std::array<double, 8> unit{y_scale, y_scale, y_scale, x_scale,
                               x_scale, x_scale, x_scale, y_scale};
    for (int i = 0; i < 8; ++i) {
        res.params[i] *= unit[i];
        for (int j = 0; j < 8; ++j) res.covariance[i][j] *= unit[i] * unit[j];
    }

    // Canonical order: sort peaks by center (permuting covariance to match)
    // so index 1 is always the middle = interfering peak.
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return res.params[3 + a] < res.params[3 + b]; });
    if (order != std::array<int, 3>{0, 1, 2}) {
        std::array<int, 8> perm{order[0], order[1], order[2],
                                3 + order[0], 3 + order[1], 3 + order[2], 6, 7};
        const auto old = res;
        for (int i = 0; i < 8; ++i) {
            res.params[i] = old.params[perm[i]];
            for (int j = 0; j < 8; ++j) res.covariance[i][j] = old.covariance[perm[i]][perm[j]];
        }
    }

    TriGaussFit fit;
    for (int i = 0; i < 3; ++i) {
        fit.amplitudes[i] = res.params[i];
        fit.centers_s[i] = res.params[3 + i];
    }
    fit.sigma_s = res.params[6];
    fit.baseline = res.params[7];
    fit.converged = res.converged;
    fit.iterations = res.iterations;
    fit.chi2 = res.cost;
    fit.residual_norm = std::sqrt(res.cost);
    fit.n_bins = hist.counts.size();
    fit.bin_width_s = hist.bin_width_s;
    fit.covariance = res.covariance;
    fit.degenerate = (fit.centers_s[1] - fit.centers_s[0] < 2.0 * fit.sigma_s) ||
                     (fit.centers_s[2] - fit.centers_s[1] < 2.0 * fit.sigma_s);

    // Peak areas in counts: N = A sigma sqrt(2 pi) / bin_width.
    const double area_factor = std::sqrt(2.0 * pi) / hist.bin_width_s;
    auto count_from = [&](std::initializer_list<int> amp_idx) {
        CountEstimate ce;
        double amp_sum = 0.0;
        for (int a : amp_idx) amp_sum += res.params[a];
        ce.value = amp_sum * fit.sigma_s * area_factor;
        // Gradient of N over the parameter vector: dN/dA_i and dN/dsigma.
        std::array<double, 8> g{};
        for (int a : amp_idx) g[a] = fit.sigma_s * area_factor;
        g[6] = amp_sum * area_factor;
        double var = 0.0;
        if (res.covariance_ok)
            for (int a = 0; a < 8; ++a)
                for (int b = 0; b < 8; ++b) var += g[a] * res.covariance[a][b] * g[b];
        ce.err_cov = var > 0.0 ? std::sqrt(var) : 0.0;
        ce.err_poisson = std::sqrt(std::max(ce.value, 0.0));
        ce.err_combined = std::hypot(ce.err_cov, ce.err_poisson);
        ce.err = ce.err_cov;
        return ce;
    };
    fit.n_central = count_from({1});
    fit.n_lateral = count_from({0, 2});
    return fit;
}

/// P_c^exp = N_c / (2 N_l) with independent-counts error propagation.
struct PcExperimental {
    double value;
    double err;
};

inline PcExperimental p_c_experimental(const TriGaussFit& fit) {
    if (!fit.converged)
        throw numerical_error("p_c_experimental: fit did not converge");
    if (!(fit.n_lateral.value > 0.0))
        throw numerical_error("p_c_experimental: lateral count is zero, ratio undefined");
    const double p = fit.n_central.value / (2.0 * fit.n_lateral.value);
    const double rc = fit.n_central.value > 0.0 ? fit.n_central.err / fit.n_central.value : 0.0;
    const double rl = fit.n_lateral.err / fit.n_lateral.value;
    return {p, std::abs(p) * std::sqrt(rc * rc + rl * rl)};
}

} // namespace satfringe
