#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "detail/log_sum.hpp"
#include "errors.hpp"
#include "heat_kernel.hpp"

namespace padic_diffusion {

namespace detail {

/// Number of steps T/h, which must be a whole number.
inline std::size_t grid_steps(double h, double horizon) {
    if (!(h > 0.0) || !(horizon > 0.0)) throw InvalidConfig("fpt.h", "h and T must be positive");
    const double ratio = horizon / h;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * ratio) {
        throw InvalidConfig("fpt.T", "T/h must be a whole number of steps");
    }
    return static_cast<std::size_t>(steps);
}

} // namespace detail

/**
 * g(t) = ∫_{‖y‖ > 1} J(‖y‖) u(y, t) dⁿy, the rate at which mass outside Z_p^n
 * jumps back in. Summed sphere by sphere until the remainder, bounded with
 * u(y,t) <= 2t‖y‖^{-n}, is below 1e-15 of the sum.
 */
template <class Cache>
double g_of_t(const Cache& cache, double t) {
    detail::require_time(t);
    if (t == 0.0) return 0.0;
    const auto& kernel = cache.kernel();
    const SpaceParams& space = cache.space();
    const double n_lp = space.n() * space.log_p();
    double sum = 0.0;
    for (int i = 1;; ++i) {
        sum += std::exp(kernel.log_value(i) + log_sphere_volume(space, i) + log_ztilde(cache, i, t));
        const double rest = 2.0 * t * std::exp(kernel.log_exterior_mass(i + 1) - (i + 1) * n_lp);
        if (rest <= 1e-15 * sum) break;
        if (i > 100000) throw SeriesDiverged("g(t) series did not converge");
    }
    return sum;
}

/// g on the grid 0, h, ..., T.
template <class Cache>
std::vector<double> sample_g(const Cache& cache, double h, double horizon) {
    const std::size_t steps = detail::grid_steps(h, horizon);
    std::vector<double> g(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m) g[m] = g_of_t(cache, static_cast<double>(m) * h);
    return g;
}

/**
 * Uniform time grid carrying g and the first-passage density f solving
 *
 *   g(t) = ∫_0^t g(t - τ) f(τ) dτ + f(t).
 */
struct VolterraGrid {
    double h;
    double horizon;
    std::vector<double> g;
    std::vector<double> f;

    double time(std::size_t m) const noexcept { return static_cast<double>(m) * h; }

    /// f with quadrature overshoot within 1e-8 below zero set to zero.
    std::vector<double> f_clamped() const {
        std::vector<double> out = f;
        for (double& v : out) {
            if (v < 0.0 && v > -1e-8) v = 0.0;
        }
        return out;
    }
};

/**
 * Forward time-stepping with the composite trapezoid rule on the convolution:
 *
 *   f_m (1 + h g_0 / 2) = g_m - h (g_m f_0 / 2 + Σ_{k=1}^{m-1} g_{m-k} f_k)
 *
 * Sequential in m, O(m²) overall.
 */
inline VolterraGrid solve_volterra(std::vector<double> g, double h) {
    if (g.empty()) throw std::invalid_argument("g must have at least one sample");
    if (!(h > 0.0)) throw InvalidConfig("fpt.h", "must be > 0");
    if (0.5 * h * std::abs(g[0]) >= 1.0) {
        throw StepTooCoarse("trapezoid diagonal weight h*g(0)/2 = " + std::to_string(0.5 * h * g[0]) + " is >= 1");
    }
    const std::size_t size = g.size();
    std::vector<double> f(size, 0.0);
    const double diagonal = 1.0 + 0.5 * h * g[0];
    f[0] = g[0];
    for (std::size_t m = 1; m < size; ++m) {
        double conv = 0.5 * g[m] * f[0];
        for (std::size_t k = 1; k < m; ++k) conv += g[m - k] * f[k];
        f[m] = (g[m] - h * conv) / diagonal;
    }
    return {h, h * static_cast<double>(size - 1), std::move(g), std::move(f)};
}

namespace detail {

/// ∫_0^{t_m} a(t_m - τ) b(τ) dτ by composite Simpson (with a 3/8 panel for odd m).
inline double simpson_convolution(const std::vector<double>& a, const std::vector<double>& b, std::size_t m,
                                  double h) {
    if (m == 0) return 0.0;
    auto prod = [&](std::size_t k) { return a[m - k] * b[k]; };
    if (m == 1) return 0.5 * h * (prod(0) + prod(1));
    double total = 0.0;
    std::size_t start = 0;
    if (m % 2 == 1) {
        total += 3.0 * h / 8.0 * (prod(0) + 3.0 * prod(1) + 3.0 * prod(2) + prod(3));
        start = 3;
    }
    for (std::size_t k = start; k + 2 <= m; k += 2) {
        total += h / 3.0 * (prod(k) + 4.0 * prod(k + 1) + prod(k + 2));
    }
    return total;
}

} // namespace detail

/**
 * max_m |g(t_m) - (g ∗ f)(t_m) - f(t_m)| with the convolution integrated by
 * Simpson's rule, i.e. independently of the trapezoid used by the solver.
 */
inline double volterra_residual(const VolterraGrid& grid) {
    double worst = 0.0;
    for (std::size_t m = 0; m < grid.g.size(); ++m) {
        const double conv = detail::simpson_convolution(grid.g, grid.f, m, grid.h);
        worst = std::max(worst, std::abs(grid.g[m] - conv - grid.f[m]));
    }
    return worst;
}

/// ∫_0^T f dt by the trapezoid rule; a lower proxy for F(0) = P(τ < ∞).
inline double return_probability(const VolterraGrid& grid) {
    double total = 0.0;
    for (std::size_t m = 1; m < grid.f.size(); ++m) total += 0.5 * grid.h * (grid.f[m - 1] + grid.f[m]);
    return total;
}

/// Running ∫_0^{t_m} f for every grid point.
inline std::vector<double> cumulative_return(const VolterraGrid& grid) {
    std::vector<double> out(grid.f.size(), 0.0);
    for (std::size_t m = 1; m < grid.f.size(); ++m) out[m] = out[m - 1] + 0.5 * grid.h * (grid.f[m - 1] + grid.f[m]);
    return out;
}

template <class Cache>
VolterraGrid solve_first_passage(const Cache& cache, double h, double horizon) {
    return solve_volterra(sample_g(cache, h, horizon), h);
}

struct LaplaceEval {
    double s;
    double value;
    int outer_terms;
    int max_inner_terms;
};

/**
 * G(s) = ∫_0^∞ e^{-st} g(t) dt as a double series over spheres:
 *
 *   G(s) = (1-p^{-n}) Σ_{i>=1} J(p^i) [ (1-p^{-n}) Σ_{j>=i} p^{n(i-j)} / (s + ω(-j))
 *                                       - 1 / (s + ω(1-i)) ]
 *
 * with ω(k) = 1 - Ĵ(p^k). The bracket is summed in the difference form
 * p^{n(i-j)} (ω(1-i) - ω(-j)) / ((s + ω(-j))(s + ω(1-i))) so that small s does
 * not cancel two large numbers.
 */
template <class Cache>
LaplaceEval laplace_G(const Cache& cache, double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw NonPositiveS("s must be a positive finite number, got " + std::to_string(s));
    const auto& kernel = cache.kernel();
    const SpaceParams& space = cache.space();
    const double n_lp = space.n() * space.log_p();
    const double sphere = space.unit_sphere_volume();
    LaplaceEval eval{s, 0.0, 0, 0};
    for (int i = 1;; ++i) {
        const double w_edge = cache.one_minus(1 - i);
        double bracket = 0.0;
        int inner = 0;
        for (int j = i;; ++j, ++inner) {
            const double w = cache.one_minus(-j);
            const double diff = cache.one_minus_difference(1 - i, -j);
            bracket += std::exp((i - j) * n_lp) * diff / ((s + w) * (s + w_edge));
            // Each remaining term is at most p^{n(i-j')} / s.
            const double rest = std::exp((i - j - 1) * n_lp) / (sphere * s);
            if (rest < 1e-16 * std::abs(bracket) || (bracket == 0.0 && rest < 1e-300)) break;
            if (inner > 100000) throw SeriesDiverged("Laplace inner series did not converge");
        }
        eval.max_inner_terms = std::max(eval.max_inner_terms, inner + 1);
        eval.value += sphere * std::exp(kernel.log_value(i)) * sphere * bracket;
        eval.outer_terms = i;
        const double rest = 2.0 * std::exp(kernel.log_exterior_mass(i + 1)) / s;
        if (rest < 1e-15 * eval.value) break;
        if (i > 100000) throw SeriesDiverged("Laplace outer series did not converge");
    }
    return eval;
}

enum class RecurrenceVerdict { recurrent, inconclusive };

inline const char* to_string(RecurrenceVerdict v) noexcept {
    return v == RecurrenceVerdict::recurrent ? "recurrent (numerically supported)" : "inconclusive";
}

struct RecurrenceReport {
    std::vector<LaplaceEval> ladder;
    double threshold;
    bool strictly_increasing;
    bool threshold_reached;
    bool hypothesis_met;  // -n < γ < 0
    std::string note;
    RecurrenceVerdict verdict;

    /// G/(1 + G) at the smallest s, a proxy for the return probability F(0+).
    double return_probability_proxy() const {
        const double g = ladder.back().value;
        return g / (1.0 + g);
    }
};

/**
 * Evaluates G on a decreasing s-ladder. The verdict is "recurrent" when G
 * increases strictly as s falls and passes the threshold; a finite ladder can
 * support recurrence, never prove it.
 */
template <class Cache>
RecurrenceReport recurrence_diagnostic(const Cache& cache, const std::vector<double>& s_ladder,
                                       double threshold = 1e3) {
    if (s_ladder.empty()) throw InvalidConfig("fpt.s_ladder", "must not be empty");
    for (std::size_t k = 1; k < s_ladder.size(); ++k) {
        if (!(s_ladder[k] < s_ladder[k - 1])) throw InvalidConfig("fpt.s_ladder", "must be strictly decreasing");
    }
    RecurrenceReport report;
    report.threshold = threshold;
    for (double s : s_ladder) report.ladder.push_back(laplace_G(cache, s));
    report.strictly_increasing = true;
    report.threshold_reached = false;
    for (std::size_t k = 0; k < report.ladder.size(); ++k) {
        if (k > 0 && !(report.ladder[k].value > report.ladder[k - 1].value)) report.strictly_increasing = false;
        if (report.ladder[k].value > threshold) report.threshold_reached = true;
    }
    const double gamma = cache.kernel().gamma();
    const int n = cache.space().n();
    report.hypothesis_met = gamma < 0.0 && gamma > -n;
    if (!report.hypothesis_met) {
        report.note = "gamma=" + std::to_string(gamma) + " lies outside (-n, 0); the recurrence theorem's hypothesis "
                      "is unmet, so the ladder says nothing either way";
    }
    report.verdict = report.strictly_increasing && report.threshold_reached ? RecurrenceVerdict::recurrent
                                                                            : RecurrenceVerdict::inconclusive;
    return report;
}

} // namespace padic_diffusion
