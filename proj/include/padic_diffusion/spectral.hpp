#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "detail/log_sum.hpp"
#include "errors.hpp"
#include "landscape.hpp"

namespace padic_diffusion {

namespace detail {

struct SpectralEntry {
    double log_omega;  // log(1 - Ĵ)
    double omega;      // 1 - Ĵ
    double jhat;       // Ĵ
};

/**
 * Ĵ(p^k) for a radial kernel, from the sphere decomposition of ∫χ_p(-ξ·x)J:
 *
 *   1 - Ĵ(p^k) = p^{n(1-k)} J(p^{1-k}) + ∫_{‖x‖ >= p^{2-k}} J
 *   Ĵ(p^k)     = ∫_{‖x‖ < p^{1-k}} J - p^{-nk} J(p^{1-k})
 *
 * Both are sums of positive terms (up to the single subtracted sphere), so
 * 1 - Ĵ is taken from the first when it is small and Ĵ from the second
 * otherwise; each is then accurate to relative rounding.
 */
template <RadialKernel K>
SpectralEntry evaluate_spectral(const K& kernel, int k) {
    const SpaceParams& space = kernel.space();
    const double n_lp = space.n() * space.log_p();
    const double log_edge = (1.0 - k) * n_lp + kernel.log_value(1 - k);
    const double log_omega = log_add(log_edge, kernel.log_exterior_mass(2 - k));
    const double omega = std::exp(log_omega);
    double jhat = 1.0 - omega;
    if (omega >= 0.5) {
        jhat = kernel.interior_mass(1 - k) - std::exp(-k * n_lp + kernel.log_value(1 - k));
    }
    constexpr double kClampTol = 1e-10;
    if (!(jhat >= -1.0 - kClampTol && jhat <= 1.0 + kClampTol)) {
        throw SeriesDiverged("spectral value at k=" + std::to_string(k) + " is " + std::to_string(jhat) +
                             ", outside [-1, 1]");
    }
    jhat = std::clamp(jhat, -1.0, 1.0);
    return {log_omega, omega, jhat};
}

} // namespace detail

/**
 * Radial Fourier transform Ĵ(p^k) of a kernel, tabulated on [k_min, k_max]
 * and evaluated directly outside the table.
 */
template <RadialKernel K>
class SpectralCache {
public:
    explicit SpectralCache(K kernel, int k_min = -40, int k_max = 40)
        : kernel_(std::move(kernel)), k_min_(k_min), k_max_(k_max) {
        if (k_min > k_max) throw std::invalid_argument("spectral window is empty");
        entries_.reserve(static_cast<std::size_t>(k_max - k_min + 1));
        for (int k = k_min; k <= k_max; ++k) entries_.push_back(detail::evaluate_spectral(kernel_, k));
    }

    const K& kernel() const noexcept { return kernel_; }
    const SpaceParams& space() const noexcept { return kernel_.space(); }
    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_max_; }

    /// Ĵ(p^k).
    double value(int k) const { return entry(k).jhat; }

    /// 1 - Ĵ(p^k), never negative.
    double one_minus(int k) const { return entry(k).omega; }

    double log_one_minus(int k) const { return entry(k).log_omega; }

    /// (1 - Ĵ(p^b)) - (1 - Ĵ(p^a)), free of cancellation when both sides are near 1.
    double one_minus_difference(int b, int a) const {
        const detail::SpectralEntry eb = entry(b);
        const detail::SpectralEntry ea = entry(a);
        if (eb.omega < 0.5 && ea.omega < 0.5) return eb.omega - ea.omega;
        return ea.jhat - eb.jhat;
    }

    /// Copy with 1 - Ĵ(p^k) shifted by delta at one tabulated k, for fault-injection tests.
    SpectralCache perturbed(int k, double delta) const {
        if (k < k_min_ || k > k_max_) throw std::out_of_range("perturbation outside the spectral table");
        SpectralCache copy = *this;
        detail::SpectralEntry& e = copy.entries_[static_cast<std::size_t>(k - k_min_)];
        e.omega += delta;
        e.jhat -= delta;
        e.log_omega = e.omega > 0.0 ? std::log(e.omega) : detail::neg_inf;
        return copy;
    }

private:
    detail::SpectralEntry entry(int k) const {
        if (k >= k_min_ && k <= k_max_) return entries_[static_cast<std::size_t>(k - k_min_)];
        return detail::evaluate_spectral(kernel_, k);
    }

    K kernel_;
    int k_min_;
    int k_max_;
    std::vector<detail::SpectralEntry> entries_;
};

/// Ĵ(p^k) without a cache.
template <RadialKernel K>
double spectral(const K& kernel, int k) {
    return detail::evaluate_spectral(kernel, k).jhat;
}

/**
 * 1 - Ĵ(1) = J(p) + ∫_{Q_p^n ∖ Z_p^n} J: the whole exterior mass plus the
 * one sphere on which χ_p(-x) averages to -p^{-n}. Strictly positive.
 */
template <RadialKernel K>
double spectral_gap_at_one(const K& kernel) {
    return std::exp(kernel.log_value(1)) + std::exp(kernel.log_exterior_mass(1));
}

/**
 * Explicit constants for the upper bound
 *
 *   1 - Ĵ(‖ξ‖) <= (B₁‖ξ‖^{-n-γ} + B₂‖ξ‖^{-γ}) e^{-C₁p/‖ξ‖}
 *
 * for J = c‖x‖^γ e^{-C₁‖x‖} with -n < γ < 0: B₁ = c(p^γ + p^n), B₂ = c p^n A₀
 * with A₀ = n! C₁^{-n} / (1 - p^{-n}), where n!/τ^n bounds ∫e^{-τ‖y‖}dⁿy.
 */
struct SpectralBoundConstants {
    double b1;
    double b2;
    double a0;
};

inline void require_negative_gamma(const ExponentialLandscape& landscape) {
    const double gamma = landscape.gamma();
    if (!(gamma < 0.0 && gamma > -landscape.space().n())) {
        throw GammaOutOfRange("this bound needs -n < gamma < 0, got gamma=" + std::to_string(gamma));
    }
}

inline SpectralBoundConstants spectral_bound_constants(const ExponentialLandscape& landscape) {
    require_negative_gamma(landscape);
    const SpaceParams& space = landscape.space();
    const double p = space.p();
    const int n = space.n();
    const double c = landscape.norm_const();
    const double a0 = std::tgamma(n + 1.0) * std::pow(landscape.c1(), -n) / space.unit_sphere_volume();
    return {c * (std::pow(p, landscape.gamma()) + std::pow(p, n)), c * std::pow(p, n) * a0, a0};
}

/// log of the bound above at ‖ξ‖ = p^k.
inline double log_spectral_bound(const ExponentialLandscape& landscape, const SpectralBoundConstants& b, int k) {
    const SpaceParams& space = landscape.space();
    const double lp = space.log_p();
    const double gamma = landscape.gamma();
    const double first = std::log(b.b1) - k * (space.n() + gamma) * lp;
    const double second = std::log(b.b2) - k * gamma * lp;
    return detail::log_add(first, second) - landscape.c1() * std::exp((1.0 - k) * lp);
}

struct SpectralBoundRow {
    int k;
    double log_one_minus;
    double log_bound;
    double log_margin;  // log_bound - log_one_minus; >= 0 when the bound holds
};

struct SpectralBoundReport {
    SpectralBoundConstants constants;
    std::vector<SpectralBoundRow> rows;

    bool all_hold() const noexcept {
        for (const SpectralBoundRow& row : rows) {
            if (!(row.log_margin >= 0.0)) return false;
        }
        return true;
    }
};

template <class Cache>
SpectralBoundReport check_spectral_upper_bound(const Cache& cache, int k_lo, int k_hi) {
    const ExponentialLandscape& landscape = cache.kernel();
    SpectralBoundReport report{spectral_bound_constants(landscape), {}};
    for (int k = k_lo; k <= k_hi; ++k) {
        const double lhs = cache.log_one_minus(k);
        const double rhs = log_spectral_bound(landscape, report.constants, k);
        report.rows.push_back({k, lhs, rhs, rhs - lhs});
    }
    return report;
}

enum class DivergenceVerdict { diverges, inconclusive };

inline const char* to_string(DivergenceVerdict v) noexcept {
    return v == DivergenceVerdict::diverges ? "diverges" : "inconclusive";
}

/**
 * Partial sums of Σ_{j=0}^{m} vol(S_{-j}) / (1 - Ĵ(p^{-j})), the integral of
 * Ω(‖ξ‖)/(1 - Ĵ(‖ξ‖)) over Z_p^n sphere by sphere. Everything is in logs:
 * the terms grow like e^{C₁p^{j+1}}.
 *
 * lower_bound_log_terms are the logs of
 * (1 - p^{-n}) p^{-j(n+γ)} e^{C₁p^{j+1}} / (B₁p^{jn} + B₂), which each term
 * must dominate.
 */
struct DivergenceReport {
    std::vector<double> log_terms;
    std::vector<double> partial_log_sums;
    std::vector<double> lower_bound_log_terms;
    double growth_floor;
    DivergenceVerdict verdict;
};

template <class Cache>
DivergenceReport divergence_diagnostic(const Cache& cache, int m_terms) {
    const ExponentialLandscape& landscape = cache.kernel();
    const SpectralBoundConstants b = spectral_bound_constants(landscape);
    if (m_terms < 0) throw std::invalid_argument("m_terms must be >= 0");
    const SpaceParams& space = landscape.space();
    const double lp = space.log_p();
    const int n = space.n();
    const double gamma = landscape.gamma();

    DivergenceReport report;
    report.growth_floor = std::ceil(std::abs(gamma)) * lp;
    detail::LogAccumulator sum;
    for (int j = 0; j <= m_terms; ++j) {
        const double term = log_sphere_volume(space, -j) - cache.log_one_minus(-j);
        sum.add(term);
        report.log_terms.push_back(term);
        report.partial_log_sums.push_back(sum.log());
        const double denom = detail::log_add(std::log(b.b1) + j * n * lp, std::log(b.b2));
        report.lower_bound_log_terms.push_back(std::log(space.unit_sphere_volume()) - j * (n + gamma) * lp +
                                               landscape.c1() * std::exp((j + 1) * lp) - denom);
    }
    constexpr int kWitness = 5;
    bool growing = m_terms >= kWitness;
    for (int j = m_terms - kWitness + 1; growing && j <= m_terms; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        growing = report.log_terms[idx] - report.log_terms[idx - 1] >= report.growth_floor;
    }
    report.verdict = growing ? DivergenceVerdict::diverges : DivergenceVerdict::inconclusive;
    return report;
}

} // namespace padic_diffusion
