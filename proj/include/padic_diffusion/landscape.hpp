#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "detail/log_sum.hpp"
#include "errors.hpp"
#include "ultrametric.hpp"

namespace padic_diffusion {

/**
 * A radial jump density J(‖x‖_p) on Q_p^n with ∫J = 1, described through its
 * values on spheres and its tail masses.
 *
 *   log_value(i)         log J(p^i), -inf where J vanishes
 *   log_exterior_mass(a) log ∫_{‖x‖ >= p^a} J
 *   interior_mass(a)     ∫_{‖x‖ < p^a} J
 *
 * Every series in the library is written in terms of these three.
 */
template <class K>
concept RadialKernel = requires(const K& kernel, int i) {
    { kernel.space() } -> std::convertible_to<const SpaceParams&>;
    { kernel.log_value(i) } -> std::convertible_to<double>;
    { kernel.log_exterior_mass(i) } -> std::convertible_to<double>;
    { kernel.interior_mass(i) } -> std::convertible_to<double>;
};

/// Cap on the number of spheres the normalization window may span.
inline constexpr int kMaxWindowTerms = 1'000'000;

/**
 * The exponential-type landscape J(‖x‖) = c ‖x‖^γ e^{-C₁‖x‖}, normalized so
 * that ∫_{Q_p^n} J dⁿx = 1.
 *
 * Normalization sums c⁻¹ = Σ_j p^{jγ} e^{-C₁p^j} vol(S_j) outward from the
 * mode until the geometric (below) or super-exponential (above) remainder
 * bound drops under 1e-17 of the running sum. The spheres kept, [window_lo,
 * window_hi], are reused by every tail-mass query so that the masses add up to
 * one to rounding.
 */
class ExponentialLandscape {
public:
    static ExponentialLandscape normalize(SpaceParams space, double gamma, double c1) {
        if (!(c1 > 0.0) || !std::isfinite(c1)) {
            throw NonPositiveRate("c1 must be a positive finite rate, got " + std::to_string(c1));
        }
        if (!(gamma > -space.n()) || !std::isfinite(gamma)) {
            throw GammaOutOfRange("gamma must satisfy gamma > -n = " + std::to_string(-space.n()) +
                                  " (otherwise ‖x‖^gamma e^{-c1‖x‖} is not integrable near 0), got " +
                                  std::to_string(gamma));
        }
        return ExponentialLandscape(space, gamma, c1);
    }

    const SpaceParams& space() const noexcept { return space_; }
    double gamma() const noexcept { return gamma_; }
    double c1() const noexcept { return c1_; }
    double norm_const() const noexcept { return std::exp(log_norm_const_); }
    double log_norm_const() const noexcept { return log_norm_const_; }
    int window_lo() const noexcept { return lo_; }
    int window_hi() const noexcept { return hi_; }

    /// The unnormalized series Σ_j p^{jγ} e^{-C₁p^j} vol(S_j), i.e. 1/c.
    double raw_mass() const noexcept { return std::exp(-log_norm_const_); }

    double log_value(int j) const noexcept {
        return log_norm_const_ + log_shape(j);
    }

    double value(int j) const noexcept { return std::exp(log_value(j)); }

    /// log ∫_{‖x‖ >= p^a} J.
    double log_exterior_mass(int a) const noexcept {
        if (a <= lo_) return std::log1p(-interior_mass(a));
        if (a <= hi_) return std::log(suffix_[static_cast<std::size_t>(a - lo_)]);
        return log_tail_above(a);
    }

    double exterior_mass(int a) const noexcept { return std::exp(log_exterior_mass(a)); }

    /// ∫_{‖x‖ < p^a} J.
    double interior_mass(int a) const noexcept {
        if (a <= lo_) return std::exp(log_tail_below(a));
        if (a <= hi_ + 1) return prefix_[static_cast<std::size_t>(a - lo_)];
        return -std::expm1(log_tail_above(a));
    }

    /// ∫_{Q_p^n ∖ Z_p^n} J, the rate at which a path leaves Z_p^n.
    double exit_rate() const noexcept { return exterior_mass(1); }

    /// Terms J(p^j) vol(S_j) inside the normalization window, lowest exponent first.
    std::vector<double> sphere_masses() const {
        std::vector<double> masses(terms_.size());
        for (std::size_t k = 0; k < terms_.size(); ++k) masses[k] = terms_[k];
        return masses;
    }

private:
    ExponentialLandscape(SpaceParams space, double gamma, double c1)
        : space_(space), gamma_(gamma), c1_(c1), log_norm_const_(0.0) {
        build_window();
    }

    /// log of p^{jγ} e^{-C₁p^j}; -inf once p^j overflows.
    double log_shape(int j) const noexcept {
        const double lp = space_.log_p();
        const double pj_log = j * lp;
        if (pj_log > 700.0) return detail::neg_inf;
        return j * gamma_ * lp - c1_ * std::exp(pj_log);
    }

    double log_raw_term(int j) const noexcept {
        return log_shape(j) + log_sphere_volume(space_, j);
    }

    void build_window() {
        const double lp = space_.log_p();
        const double alpha = gamma_ + space_.n();
        const double mode = std::log(alpha / c1_) / lp;
        const int start = static_cast<int>(std::floor(mode));
        constexpr double kTol = 1e-17;

        detail::LogAccumulator sum;
        sum.add(log_raw_term(start));
        int hi = start;
        for (;;) {
            const double next = log_raw_term(hi + 1);
            // Ratio of consecutive terms above the mode is p^α e^{-C₁p^j(p-1)}, itself decreasing.
            const double log_ratio = alpha * lp - c1_ * std::exp((hi + 1) * lp) * (space_.p() - 1);
            if (log_ratio < std::log(0.5) &&
                next + std::log1p(std::exp(log_ratio)) + std::log(2.0) < sum.log() + std::log(kTol)) {
                break;
            }
            sum.add(next);
            ++hi;
            if (hi - start > kMaxWindowTerms) throw SeriesDiverged("upper normalization tail did not close");
        }
        int lo = start;
        for (;;) {
            // Below the mode the ratio t(j-1)/t(j) decreases toward p^{-α} as j falls.
            const double log_rho = -alpha * lp + c1_ * std::exp((lo - 1) * lp) * (space_.p() - 1);
            const double next = log_raw_term(lo - 1);
            if (log_rho < 0.0 && next - std::log(-std::expm1(log_rho)) < sum.log() + std::log(kTol)) {
                break;
            }
            sum.add(next);
            --lo;
            if (start - lo > kMaxWindowTerms) {
                throw SeriesDiverged("lower normalization tail did not close within " +
                                     std::to_string(kMaxWindowTerms) + " spheres");
            }
        }
        lo_ = lo;
        hi_ = hi;
        log_norm_const_ = -sum.log();

        const auto count = static_cast<std::size_t>(hi_ - lo_ + 1);
        terms_.resize(count);
        for (std::size_t k = 0; k < count; ++k) {
            terms_[k] = std::exp(log_norm_const_ + log_raw_term(lo_ + static_cast<int>(k)));
        }
        // Tails are accumulated from the small end for accuracy.
        suffix_.assign(count + 1, 0.0);
        suffix_[count] = std::exp(log_tail_above(hi_ + 1));
        for (std::size_t k = count; k-- > 0;) suffix_[k] = suffix_[k + 1] + terms_[k];
        prefix_.assign(count + 1, 0.0);
        prefix_[0] = std::exp(log_tail_below(lo_));
        for (std::size_t k = 0; k < count; ++k) prefix_[k + 1] = prefix_[k] + terms_[k];
    }

    /// log Σ_{j >= a} J vol, summed directly; valid for a above the mode.
    double log_tail_above(int a) const noexcept {
        const double lp = space_.log_p();
        detail::LogAccumulator sum;
        for (int j = a;; ++j) {
            const double term = log_norm_const_ + log_raw_term(j);
            if (term == detail::neg_inf) break;
            sum.add(term);
            const double log_ratio = (gamma_ + space_.n()) * lp - c1_ * std::exp(j * lp) * (space_.p() - 1);
            if (log_ratio < std::log(0.5) && term + log_ratio + std::log(2.0) < sum.log() - 40.0) break;
            if (j - a > kMaxWindowTerms) break;
        }
        return sum.log();
    }

    /// log Σ_{j < a} J vol for a at or below the window, by the geometric lower bound.
    double log_tail_below(int a) const noexcept {
        const double lp = space_.log_p();
        const double alpha = gamma_ + space_.n();
        detail::LogAccumulator sum;
        for (int j = a - 1;; --j) {
            const double term = log_norm_const_ + log_raw_term(j);
            sum.add(term);
            const double log_rho = -alpha * lp + c1_ * std::exp((j - 1) * lp) * (space_.p() - 1);
            if (log_rho < 0.0 && term + log_rho - std::log(-std::expm1(log_rho)) < sum.log() - 40.0) break;
            if (a - j > kMaxWindowTerms) break;
        }
        return sum.log();
    }

    SpaceParams space_;
    double gamma_;
    double c1_;
    double log_norm_const_;
    int lo_ = 0;
    int hi_ = 0;
    std::vector<double> terms_;
    std::vector<double> suffix_;
    std::vector<double> prefix_;
};

static_assert(RadialKernel<ExponentialLandscape>);

using LandscapeParams = ExponentialLandscape;

/// J(p^j) for the landscape; exponent must be finite.
inline double j_value(const ExponentialLandscape& landscape, const NormExponent& j) {
    return landscape.value(j.value());
}

/**
 * Partial sums of the one-dimensional integral ∫_{Z_p} e^{-c|x|}/|x| dx,
 * Σ_{j=-m}^{0} e^{-c p^j}(1 - p^{-1}), for m = 0..max_m. Each sphere adds
 * roughly (1 - 1/p), so the sums grow linearly and the integral diverges.
 */
inline std::vector<double> nonintegrable_partial_sums(const SpaceParams& space, double rate, int max_m) {
    if (space.n() != 1) throw std::invalid_argument("the non-integrability demo is one-dimensional");
    if (max_m < 0) throw std::invalid_argument("max_m must be >= 0");
    std::vector<double> sums;
    sums.reserve(static_cast<std::size_t>(max_m) + 1);
    const double sphere = space.unit_sphere_volume();
    double acc = 0.0;
    for (int m = 0; m <= max_m; ++m) {
        acc += std::exp(-rate * std::pow(static_cast<double>(space.p()), -m)) * sphere;
        sums.push_back(acc);
    }
    return sums;
}

} // namespace padic_diffusion
