#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace padic_diffusion {

using Rational = boost::multiprecision::cpp_rational;

constexpr bool is_prime(std::int64_t value) noexcept {
    if (value < 2) return false;
    for (std::int64_t d = 2; d * d <= value; ++d) {
        if (value % d == 0) return false;
    }
    return true;
}

/// The ambient space Q_p^n.
class SpaceParams {
public:
    SpaceParams(int p, int n) : p_(p), n_(n) {
        if (!is_prime(p)) throw InvalidSpace("p must be prime, got " + std::to_string(p));
        if (n < 1) throw InvalidSpace("n must be >= 1, got " + std::to_string(n));
    }

    int p() const noexcept { return p_; }
    int n() const noexcept { return n_; }
    double log_p() const noexcept { return std::log(static_cast<double>(p_)); }

    /// p^{-n}, the measure of pZ_p^n.
    double p_minus_n() const noexcept { return std::pow(static_cast<double>(p_), -n_); }

    /// 1 - p^{-n}, the measure of the unit sphere.
    double unit_sphere_volume() const noexcept { return -std::expm1(-n_ * log_p()); }

    friend bool operator==(const SpaceParams&, const SpaceParams&) = default;

private:
    int p_;
    int n_;
};

/**
 * Norm of a point written as an exponent: ‖x‖_p = p^j.
 *
 * Two non-finite values exist. `zero()` is the point x = 0 and compares below
 * everything. `inside_unit_ball()` stands for "somewhere in Z_p^n" (the norm of
 * the identity coset of Q_p^n/Z_p^n); it is below every j >= 1 and unordered
 * with respect to finite j <= 0.
 */
class NormExponent {
public:
    constexpr explicit NormExponent(int j) noexcept : kind_(Kind::finite), j_(j) {}

    static constexpr NormExponent zero() noexcept { return NormExponent(Kind::zero); }
    static constexpr NormExponent inside_unit_ball() noexcept {
        return NormExponent(Kind::inside_unit_ball);
    }

    constexpr bool is_zero() const noexcept { return kind_ == Kind::zero; }
    constexpr bool is_inside_unit_ball() const noexcept { return kind_ == Kind::inside_unit_ball; }
    constexpr bool is_finite() const noexcept { return kind_ == Kind::finite; }

    int value() const {
        if (!is_finite()) throw std::logic_error("NormExponent::value on a non-finite exponent");
        return j_;
    }

    /// True when the exponent denotes a point of Z_p^n (zero, the tag, or j <= 0).
    constexpr bool within_unit_ball() const noexcept { return !is_finite() || j_ <= 0; }

    friend constexpr bool operator==(const NormExponent& a, const NormExponent& b) noexcept {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.j_ == b.j_);
    }

    friend constexpr std::partial_ordering operator<=>(const NormExponent& a,
                                                       const NormExponent& b) noexcept {
        if (a == b) return std::partial_ordering::equivalent;
        if (a.is_zero()) return std::partial_ordering::less;
        if (b.is_zero()) return std::partial_ordering::greater;
        if (a.is_finite() && b.is_finite()) return a.j_ <=> b.j_;
        const NormExponent& finite = a.is_finite() ? a : b;
        if (finite.j_ <= 0) return std::partial_ordering::unordered;
        return a.is_finite() ? std::partial_ordering::greater : std::partial_ordering::less;
    }

private:
    enum class Kind : std::uint8_t { zero, inside_unit_ball, finite };
    constexpr explicit NormExponent(Kind kind) noexcept : kind_(kind), j_(0) {}

    Kind kind_;
    int j_;
};

inline Rational rational_power(int p, long long e) {
    Rational base = 1;
    const Rational factor = e >= 0 ? Rational(p) : Rational(1) / p;
    for (long long k = 0; k < std::llabs(e); ++k) base *= factor;
    return base;
}

/// Exact Haar measure of the sphere S_j^n = {‖x‖_p = p^j}, i.e. p^{jn}(1 - p^{-n}).
inline Rational sphere_volume_exact(const SpaceParams& space, int j) {
    const long long e = static_cast<long long>(j) * space.n();
    return rational_power(space.p(), e) * (1 - rational_power(space.p(), -space.n()));
}

inline double log_sphere_volume(const SpaceParams& space, int j) noexcept {
    return j * space.n() * space.log_p() + std::log(space.unit_sphere_volume());
}

/// Haar measure of S_j^n; exact rational arithmetic while |jn| <= 30, log-space beyond.
inline double sphere_volume(const SpaceParams& space, int j) {
    if (std::abs(static_cast<long long>(j) * space.n()) <= 30) {
        return static_cast<double>(sphere_volume_exact(space, j));
    }
    return std::exp(log_sphere_volume(space, j));
}

/// Measure of the ball B_j^n, p^{jn}.
inline double ball_volume(const SpaceParams& space, int j) noexcept {
    return std::exp(j * space.n() * space.log_p());
}

namespace detail {

inline int character_case(const NormExponent& y_exp, int sphere_exp) {
    if (y_exp.is_zero()) return 0;
    if (!y_exp.is_finite()) {
        throw std::invalid_argument("character_sphere_integral needs a finite exponent or zero");
    }
    const long long s = static_cast<long long>(y_exp.value()) + sphere_exp;
    if (s <= 0) return 0;
    return s == 1 ? 1 : 2;
}

} // namespace detail

/**
 * ∫_{‖ξ‖_p = p^{sphere_exp}} χ_p(-y·ξ) dⁿξ for any y with ‖y‖_p = p^{y_exp}.
 *
 * The character is identically 1 on the sphere when ‖y‖‖ξ‖ <= 1; when the
 * product is exactly p only the subsphere p^{sphere_exp+1}Z_p^n survives and
 * the integral is -p^{n(sphere_exp-1)}; beyond that it averages to zero.
 */
inline double character_sphere_integral(const SpaceParams& space, const NormExponent& y_exp,
                                        int sphere_exp) {
    switch (detail::character_case(y_exp, sphere_exp)) {
    case 0: return sphere_volume(space, sphere_exp);
    case 1: return -ball_volume(space, sphere_exp - 1);
    default: return 0.0;
    }
}

inline Rational character_sphere_integral_exact(const SpaceParams& space,
                                                const NormExponent& y_exp, int sphere_exp) {
    switch (detail::character_case(y_exp, sphere_exp)) {
    case 0: return sphere_volume_exact(space, sphere_exp);
    case 1:
        return -rational_power(space.p(), static_cast<long long>(sphere_exp - 1) * space.n());
    default: return Rational(0);
    }
}

} // namespace padic_diffusion
