#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace satfringe {

// Small dense Levenberg-Marquardt for weighted least squares.  Hand-rolled
// on purpose: the fit is part of the measurement pipeline and its exact
// numeric policy (damping schedule, convergence tests, covariance) must stay
// pinned rather than float with an external solver's defaults.

template <std::size_t NP>
struct LevMarOptions {
    double lambda0 = 1e-3;
    double lambda_shrink = 1.0 / 3.0;
    double lambda_grow = 4.0;
    double lambda_max = 1e12;
    double rel_cost_tol = 1e-10;
    double grad_tol = 1e-8;
    int max_iterations = 200;
};

template <std::size_t NP>
struct LevMarResult {
    std::array<double, NP> params{};
    std::array<std::array<double, NP>, NP> covariance{};
    double cost = 0.0; // chi^2 = sum w (f - y)^2
    double grad_inf_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool covariance_ok = false;
};

namespace detail {

/// Solve A x = b in place (partial pivoting); false when singular.
template <std::size_t N>
bool solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N> b,
                  std::array<double, N>& x) {
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return true;
}

/// Invert a symmetric positive-definite-ish matrix by solving N systems.
template <std::size_t N>
bool invert_matrix(const std::array<std::array<double, N>, N>& a,
                   std::array<std::array<double, N>, N>& inv) {
    for (std::size_t col = 0; col < N; ++col) {
        std::array<double, N> e{};
        e[col] = 1.0;
        std::array<double, N> x{};
        if (!solve_linear<N>(a, e, x)) return false;
        for (std::size_t r = 0; r < N; ++r) inv[r][col] = x[r];
    }
    return true;
}

} // namespace detail

/// model(x, p, grad) -> f(x; p), filling grad with the partials.
/// clamp(p) projects parameters back into their feasible box after a step.
template <std::size_t NP, typename Model, typename Clamp>
LevMarResult<NP> levmar_fit(Model&& model, Clamp&& clamp, const std::vector<double>& xs,
                            const std::vector<double>& ys, const std::vector<double>& ws,
                            std::array<double, NP> p0,
                            const LevMarOptions<NP>& opt = LevMarOptions<NP>{}) {
    const std::size_t n = xs.size();
    auto chi2 = [&](const std::array<double, NP>& p) {
        double c = 0.0;
        std::array<double, NP> g;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = model(xs[i], p, g) - ys[i];
            c += ws[i] * r * r;
        }
        return c;
    };

    LevMarResult<NP> out;
    clamp(p0);
    out.params = p0;
    out.cost = chi2(p0);
    double lambda = opt.lambda0;

    std::array<std::array<double, NP>, NP> jtj;
    std::array<double, NP> jtr;
    for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
        for (auto& row : jtj) row.fill(0.0);
        jtr.fill(0.0);
        std::array<double, NP> g;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = model(xs[i], out.params, g) - ys[i];
            for (std::size_t a = 0; a < NP; ++a) {
                jtr[a] += ws[i] * g[a] * r;
                for (std::size_t b = a; b < NP; ++b) jtj[a][b] += ws[i] * g[a] * g[b];
            }
        }
        for (std::size_t a = 0; a < NP; ++a)
            for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

        // Active set: a parameter sitting on a clamp boundary with the
        // descent direction pointing outward gets frozen this iteration.
        // Projecting such components instead makes the step zigzag along the
        // boundary, improving the cost geometrically slowly forever.
        for (std::size_t a = 0; a < NP; ++a) {
            if (jtr[a] == 0.0) continue;
            auto probe = out.params;
            const double eps = 1e-6 * (1.0 + std::abs(probe[a]));
            probe[a] += (jtr[a] < 0.0 ? eps : -eps); // descent direction
            clamp(probe);
            if (probe[a] == out.params[a]) {
                jtr[a] = 0.0;
                for (std::size_t b = 0; b < NP; ++b) jtj[a][b] = jtj[b][a] = 0.0;
                jtj[a][a] = 1.0;
            }
        }

        // Convergence on the reduced (free-parameter) gradient.
        out.grad_inf_norm = 0.0;
        for (std::size_t a = 0; a < NP; ++a)
            out.grad_inf_norm = std::max(out.grad_inf_norm, std::abs(jtr[a]));
        if (out.grad_inf_norm < opt.grad_tol) {
            out.converged = true;
            break;
        }

        double diag_max = 0.0;
        for (std::size_t a = 0; a < NP; ++a) diag_max = std::max(diag_max, jtj[a][a]);
        if (diag_max == 0.0) break;

        bool stepped = false;
        bool solvable = false;
        while (lambda <= opt.lambda_max) {
            auto damped = jtj;
            for (std::size_t a = 0; a < NP; ++a)
                damped[a][a] += lambda * std::max(jtj[a][a], 1e-12 * diag_max);
            std::array<double, NP> delta{};
            std::array<double, NP> rhs;
            for (std::size_t a = 0; a < NP; ++a) rhs[a] = -jtr[a];
            if (detail::solve_linear<NP>(damped, rhs, delta)) {
                solvable = true;
                auto trial = out.params;
                for (std::size_t a = 0; a < NP; ++a) trial[a] += delta[a];
                clamp(trial);
                const double trial_cost = chi2(trial);
                if (trial_cost < out.cost) {
                    const double rel = (out.cost - trial_cost) / std::max(out.cost, 1e-300);
                    out.params = trial;
                    out.cost = trial_cost;
                    lambda *= opt.lambda_shrink;
                    stepped = true;
                    if (rel < opt.rel_cost_tol) out.converged = true;
                    break;
                }
            }
            lambda *= opt.lambda_grow;
        }
        if (!stepped) {
            // Damping exhausted: even the near-zero-length damped step cannot
            // improve the cost, so we sit at a machine-resolution optimum
            // (possibly pressed against a clamp boundary).  Distinct from
            // iteration exhaustion, which reports converged = false.
            out.converged = solvable;
            break;
        }
        if (out.converged) break;
    }

    // Covariance from the undamped normal matrix at the solution.
    for (auto& row : jtj) row.fill(0.0);
    std::array<double, NP> g;
    for (std::size_t i = 0; i < n; ++i) {
        model(xs[i], out.params, g);
        for (std::size_t a = 0; a < NP; ++a)
            for (std::size_t b = a; b < NP; ++b) jtj[a][b] += ws[i] * g[a] * g[b];
    }
    for (std::size_t a = 0; a < NP; ++a)
        for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
    out.covariance_ok = detail::invert_matrix<NP>(jtj, out.covariance);
    return out;
}

} // namespace satfringe
