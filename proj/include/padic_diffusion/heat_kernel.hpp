#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "coset.hpp"
#include "detail/log_sum.hpp"
#include "errors.hpp"
#include "spectral.hpp"
#include "ultrametric.hpp"

namespace padic_diffusion {

/// A function of the norm only: values[k] at norm exponent first + k, at time t.
struct RadialProfile {
    SpaceParams space;
    int first;
    double t;
    std::vector<double> values;
};

namespace detail {

inline constexpr double kSeriesRelTol = 1e-17;

inline void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("time must be finite and >= 0, got " + std::to_string(t));
    }
}

/// Difference of two positive numbers kept as separate log-sums.
class SignedLogSum {
public:
    void add(double log_magnitude, bool negative) noexcept {
        (negative ? neg_ : pos_).add(log_magnitude);
    }

    double log_abs_total() const noexcept { return log_add(pos_.log(), neg_.log()); }

    /// log of the (positive part of the) signed total, -inf when it is <= 0.
    double log_value() const noexcept {
        const double lp = pos_.log();
        const double ln = neg_.log();
        if (lp == neg_inf || lp <= ln) return neg_inf;
        return lp + std::log1p(-std::exp(ln - lp));
    }

    /// log of the amount by which the total falls below zero, -inf when it does not.
    double log_deficit() const noexcept {
        const double lp = pos_.log();
        const double ln = neg_.log();
        if (ln == neg_inf || ln <= lp) return neg_inf;
        return ln + std::log1p(-std::exp(lp - ln));
    }

private:
    LogAccumulator pos_;
    LogAccumulator neg_;
};

/// log of an upper bound on 1 - Ĵ(p^k) valid for every k <= k_top.
template <class Cache>
double log_one_minus_majorant(const Cache& cache, int k_top) {
    const double sphere = cache.space().unit_sphere_volume();
    return cache.kernel().log_exterior_mass(1 - k_top) + std::log1p(1.0 / sphere);
}

/**
 * log|e^{-ω_a t} - e^{-ω_b t}| and its sign, with ω_k = 1 - Ĵ(p^k).
 * The difference ω_b - ω_a is formed in log space when both are small so that
 * underflowing kernels still give finite logs.
 */
template <class Cache>
std::pair<double, bool> log_exp_difference(const Cache& cache, int a, int b, double t) {
    const double la = cache.log_one_minus(a);
    const double lb = cache.log_one_minus(b);
    double log_d;
    bool negative;
    if (std::exp(la) < 0.5 && std::exp(lb) < 0.5) {
        if (la == lb) return {neg_inf, false};
        negative = la > lb;
        const double hi = negative ? la : lb;
        const double lo = negative ? lb : la;
        log_d = hi + std::log1p(-std::exp(lo - hi));
    } else {
        const double d = cache.one_minus_difference(b, a);
        if (d == 0.0) return {neg_inf, false};
        negative = d < 0.0;
        log_d = std::log(std::abs(d));
    }
    // e^{-ω_a t} - e^{-ω_b t} = e^{-ω_a t} (1 - e^{-(ω_b - ω_a) t}).
    const double log_x = log_d + std::log(t);
    double log_factor;
    if (log_x < -20.0) {
        const double x = std::exp(log_x);
        log_factor = log_x + (negative ? x / 2 : -x / 2);
    } else {
        const double x = negative ? -std::exp(log_x) : std::exp(log_x);
        log_factor = std::log(std::abs(-std::expm1(-x)));
    }
    return {-std::exp(la) * t + log_factor, negative};
}

} // namespace detail

/**
 * log Z̃(x, t) at ‖x‖ = p^i, the density of the heat kernel away from its
 * atom e^{-t}δ₀:
 *
 *   Z̃ = ‖x‖^{-n} (1 - p^{-n}) Σ_{j>=0} p^{-nj} (e^{-ω(-j-i)t} - e^{-ω(1-i)t})
 *
 * with ω(k) = 1 - Ĵ(p^k). Returns -inf when Z̃ is zero (t = 0).
 */
template <class Cache>
double log_ztilde(const Cache& cache, int i, double t) {
    detail::require_time(t);
    if (t == 0.0) return detail::neg_inf;
    const SpaceParams& space = cache.space();
    const double n_lp = space.n() * space.log_p();
    const double log_sphere = std::log(space.unit_sphere_volume());
    const int b = 1 - i;
    const double log_omega_b = cache.log_one_minus(b);
    detail::SignedLogSum sum;
    for (int j = 0;; ++j) {
        const auto [log_term, negative] = detail::log_exp_difference(cache, -j - i, b, t);
        sum.add(log_term - j * n_lp, negative);
        // |e^{-ω_a t} - e^{-ω_b t}| <= t (ω_a + ω_b), and every later ω_a is below the majorant.
        const double log_rest = -(j + 1) * n_lp - log_sphere + std::log(t) +
                                detail::log_add(log_omega_b, detail::log_one_minus_majorant(cache, -j - i - 1));
        if (log_rest < sum.log_abs_total() + std::log(detail::kSeriesRelTol)) break;
        if (log_rest == detail::neg_inf) break;
        if (j > 100000) throw SeriesDiverged("heat kernel series did not converge");
    }
    const double scale = -i * n_lp + log_sphere;
    const double log_value = sum.log_value();
    if (log_value == detail::neg_inf && sum.log_deficit() + scale > std::log(1e-12)) {
        throw SeriesDiverged("heat kernel came out negative (-" + std::to_string(std::exp(sum.log_deficit() + scale)) +
                             ") at i=" + std::to_string(i));
    }
    return log_value + scale;
}

/// Z̃(x, t) for x ≠ 0 with ‖x‖ = p^{x_exp}.
template <class Cache>
double ztilde(const Cache& cache, const NormExponent& x_exp, double t) {
    if (x_exp.is_zero()) throw ZeroPoint("the heat kernel density is defined only away from x = 0");
    if (!x_exp.is_finite()) throw std::invalid_argument("ztilde needs a finite norm exponent");
    return std::exp(log_ztilde(cache, x_exp.value(), t));
}

/// S(t): the probability of sitting in Z_p^n at time t after starting uniformly there.
template <class Cache>
double survival(const Cache& cache, double t) {
    detail::require_time(t);
    if (t == 0.0) return 1.0;
    const SpaceParams& space = cache.space();
    const double n_lp = space.n() * space.log_p();
    const double sphere = space.unit_sphere_volume();
    // 1 - S = (1 - p^{-n}) Σ_j p^{-nj} (1 - e^{-ω(-j)t}), a sum of positive terms.
    detail::LogAccumulator leak;
    for (int j = 0;; ++j) {
        const double x = cache.one_minus(-j) * t;
        if (x > 0.0) leak.add(-j * n_lp + std::log(-std::expm1(-x)));
        const double log_rest = -(j + 1) * n_lp - std::log(sphere) + std::log(t) +
                                detail::log_one_minus_majorant(cache, -j - 1);
        if (log_rest < leak.log() + std::log(detail::kSeriesRelTol) || log_rest == detail::neg_inf) break;
        if (j > 100000) throw SeriesDiverged("survival series did not converge");
    }
    return 1.0 - sphere * leak.value();
}

/// u(x, t) with u(·,0) the indicator of Z_p^n; constant on Z_p^n, equal to Z̃ outside.
template <class Cache>
double u_profile(const Cache& cache, const NormExponent& i, double t) {
    if (i.within_unit_ball()) return survival(cache, t);
    return std::exp(log_ztilde(cache, i.value(), t));
}

/// ∂u/∂t at norm exponent i.
template <class Cache>
double du_dt(const Cache& cache, const NormExponent& i, double t) {
    detail::require_time(t);
    const SpaceParams& space = cache.space();
    const double n_lp = space.n() * space.log_p();
    const double sphere = space.unit_sphere_volume();
    double sum = 0.0;
    if (i.within_unit_ball()) {
        for (int j = 0;; ++j) {
            const double w = cache.one_minus(-j);
            const double term = std::exp(-j * n_lp) * w * std::exp(-w * t);
            sum -= term;
            const double rest = 2.0 * std::exp(-(j + 1) * n_lp) / sphere;
            if (rest < std::abs(sum) * detail::kSeriesRelTol || rest < 1e-300) break;
        }
        return sphere * sum;
    }
    const int x = i.value();
    const int b = 1 - x;
    const double wb = cache.one_minus(b);
    const double head = wb * std::exp(-wb * t);
    for (int j = 0;; ++j) {
        const double wa = cache.one_minus(-j - x);
        sum += std::exp(-j * n_lp) * (head - wa * std::exp(-wa * t));
        const double rest = 4.0 * std::exp(-(j + 1) * n_lp) / sphere;
        if (rest < std::abs(sum) * detail::kSeriesRelTol || rest < 1e-300) break;
    }
    return std::exp(-x * n_lp) * sphere * sum;
}

/// C = ∫_{Q_p^n ∖ Z_p^n} J, the rate of leaving Z_p^n.
template <class Cache>
double exit_rate(const Cache& cache) {
    return std::exp(cache.kernel().log_exterior_mass(1));
}

/**
 * (J ∗ u(·,t))(x) at ‖x‖ = p^i, by counting how far x - w sits from the
 * origin for each sphere of w:
 *
 *   ‖w‖ <= 1        x - w stays at norm p^i (or in Z_p^n when x is)
 *   ‖w‖ = p^k, k<i  x - w at norm p^i
 *   ‖w‖ = p^i       x - w spread over B_i minus the ball x + B_{i-1}
 *   ‖w‖ = p^k, k>i  x - w at norm p^k
 */
template <class Cache>
double convolve_with_kernel(const Cache& cache, const NormExponent& i, double t) {
    const auto& kernel = cache.kernel();
    const SpaceParams& space = cache.space();
    const double u_in = survival(cache, t);
    const double inner = -std::expm1(kernel.log_exterior_mass(1));
    auto u_at = [&](int k) { return std::exp(log_ztilde(cache, k, t)); };
    auto jv = [&](int k) { return std::exp(kernel.log_value(k) + log_sphere_volume(space, k)); };
    const int x = i.within_unit_ball() ? 0 : i.value();
    double sum = inner * (x == 0 ? u_in : u_at(x));
    if (x >= 1) {
        const double ux = u_at(x);
        for (int k = 1; k < x; ++k) sum += jv(k) * ux;
        double ball = u_in;
        for (int m = 1; m < x; ++m) ball += sphere_volume(space, m) * u_at(m);
        ball += (sphere_volume(space, x) - ball_volume(space, x - 1)) * ux;
        sum += std::exp(kernel.log_value(x)) * ball;
    }
    for (int k = x + 1;; ++k) {
        sum += jv(k) * u_at(k);
        if (std::exp(kernel.log_exterior_mass(k + 1)) < 1e-18 * sum) break;
    }
    return sum;
}

/// A ball ‖y - center‖ <= p^{radius_exp}; radius_exp <= 0 keeps it inside one coset of Z_p^n.
struct CosetBall {
    CosetPoint center;
    int radius_exp;
};

/**
 * p_t(x, E) for a ball E. Seen from x, E is either a union of whole spheres
 * around x (x inside E) or a set at a single distance from x, so the answer is
 * a finite radial sum. Points of a coset are taken at its canonical
 * representative.
 */
template <class Cache>
double transition_prob(const Cache& cache, const CosetPoint& x, const CosetBall& ball, double t) {
    detail::require_time(t);
    const int cap = x.depth_cap();
    if (ball.radius_exp > cap || ball.radius_exp < -cap) {
        throw UnsupportedBall("ball radius p^" + std::to_string(ball.radius_exp) + " straddles the depth cap " +
                              std::to_string(cap));
    }
    const SpaceParams& space = cache.space();
    const NormExponent d = coset_sub(x, ball.center).norm_exponent();
    const int r = ball.radius_exp;
    const bool inside = d.is_inside_unit_ball() || d.value() <= r;
    if (t == 0.0) return inside ? 1.0 : 0.0;
    if (!inside) return ball_volume(space, r) * std::exp(log_ztilde(cache, d.value(), t));
    if (r >= 1) {
        double mass = survival(cache, t);
        for (int k = 1; k <= r; ++k) mass += sphere_volume(space, k) * std::exp(log_ztilde(cache, k, t));
        return mass;
    }
    double mass = std::exp(-t);
    for (int k = r;; --k) {
        const double term = sphere_volume(space, k) * std::exp(log_ztilde(cache, k, t));
        mass += term;
        if (k < r - 3 && term < 1e-18 * mass) break;
        if (k < r - 4000) throw SeriesDiverged("ball mass around the origin did not converge");
    }
    return mass;
}

/**
 * Dense transition matrix of the coset chain B_M / Z_p^n at time t:
 * P[a][b] = u(‖b - a‖, t). Mass that leaves B_M is not returned to it.
 */
template <class Cache>
std::vector<double> transition_matrix(const Cache& cache, const CosetChain& chain, double t) {
    const int m = chain.radius_exp();
    std::vector<double> by_norm(static_cast<std::size_t>(m) + 1);
    by_norm[0] = survival(cache, t);
    for (int k = 1; k <= m; ++k) by_norm[static_cast<std::size_t>(k)] = std::exp(log_ztilde(cache, k, t));
    const std::size_t size = chain.size();
    std::vector<CosetPoint> points;
    points.reserve(size);
    for (std::size_t a = 0; a < size; ++a) points.push_back(chain.point(a));
    std::vector<double> matrix(size * size);
    for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t b = 0; b < size; ++b) {
            const CosetPoint diff = coset_sub(points[b], points[a]);
            matrix[a * size + b] = by_norm[static_cast<std::size_t>(diff.depth())];
        }
    }
    return matrix;
}

/// Total transition mass e^{-t} + Σ_i Z̃(p^i,t) vol(S_i) over the summation window used.
struct MassAudit {
    double t;
    double atom;
    double continuous_mass;
    double total;
    double defect;
    int i_lo;
    int i_hi;
};

/**
 * Sums the sphere masses of Z̃ over [i_lo, i_hi], starting from [-40, 40] and
 * widening by 20 on each side until the defect |total - 1| < 1e-8 or
 * `max_width` is reached.
 */
template <class Cache>
MassAudit mass_audit(const Cache& cache, double t, int max_width = 2000) {
    detail::require_time(t);
    const SpaceParams& space = cache.space();
    auto sphere_mass = [&](int i) { return sphere_volume(space, i) * std::exp(log_ztilde(cache, i, t)); };
    int lo = -40;
    int hi = 40;
    double mass = 0.0;
    for (int i = lo; i <= hi; ++i) mass += sphere_mass(i);
    const double atom = std::exp(-t);
    while (std::abs(atom + mass - 1.0) >= 1e-8 && hi - lo < max_width) {
        // Lower spheres are small; add them smallest first.
        double low = 0.0;
        for (int i = lo - 20; i < lo; ++i) low += sphere_mass(i);
        double high = 0.0;
        for (int i = hi + 1; i <= hi + 20; ++i) high += sphere_mass(i);
        mass += low + high;
        lo -= 20;
        hi += 20;
    }
    return {t, atom, mass, atom + mass, std::abs(atom + mass - 1.0), lo, hi};
}

/// Z̃ and u sampled on spheres [first, last] at time t.
template <class Cache>
RadialProfile ztilde_profile(const Cache& cache, int first, int last, double t) {
    RadialProfile profile{cache.space(), first, t, {}};
    for (int i = first; i <= last; ++i) profile.values.push_back(std::exp(log_ztilde(cache, i, t)));
    return profile;
}

/**
 * lhs <= rhs for two logarithms, allowing the rounding a log-space sum carries
 * (64 ulps of the larger magnitude). Bounds that are tight to leading order
 * would otherwise flip on the last bit.
 */
inline bool log_le(double lhs, double rhs) noexcept {
    if (lhs == detail::neg_inf) return true;
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return lhs <= rhs + 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

struct DecayBoundRow {
    int x_exp;
    double t;
    double log_ztilde;
    double log_uniform_bound;  // log 2t‖x‖^{-n}
    double log_claim_bound;    // log t‖x‖^{-n}(1 - Ĵ(p/‖x‖))
    double log_decay_bound;    // log C₀ t ‖x‖^γ e^{-C₁‖x‖}
};

struct DecayBoundReport {
    int l;
    double c0;
    std::vector<DecayBoundRow> rows;

    bool uniform_holds() const noexcept {
        for (const auto& r : rows) {
            if (!log_le(r.log_ztilde, r.log_uniform_bound)) return false;
        }
        return true;
    }
    bool claim_holds() const noexcept {
        for (const auto& r : rows) {
            if (!log_le(r.log_ztilde, r.log_claim_bound)) return false;
        }
        return true;
    }
    bool decay_holds() const noexcept {
        for (const auto& r : rows) {
            if (!log_le(r.log_ztilde, r.log_decay_bound)) return false;
        }
        return true;
    }
};

/**
 * Pointwise checks of three upper bounds on Z̃ at ‖x‖ = p^i, i >= l:
 * 2t‖x‖^{-n}; t‖x‖^{-n}(1 - Ĵ(p‖x‖^{-1})); and C₀ t‖x‖^γ e^{-C₁‖x‖} with
 * C₀ = B₁p^{-n-γ} + B₂p^{-γ}p^{-nl}, obtained by inserting the spectral upper
 * bound at ‖ξ‖ = p/‖x‖ into the second.
 */
template <class Cache>
DecayBoundReport decay_bound_check(const Cache& cache, int l, const std::vector<int>& x_exps,
                                   const std::vector<double>& times) {
    const ExponentialLandscape& landscape = cache.kernel();
    const SpectralBoundConstants b = spectral_bound_constants(landscape);
    const SpaceParams& space = landscape.space();
    const double lp = space.log_p();
    const int n = space.n();
    const double gamma = landscape.gamma();
    DecayBoundReport report;
    report.l = l;
    report.c0 = b.b1 * std::pow(space.p(), -n - gamma) + b.b2 * std::pow(space.p(), -gamma - n * l);
    for (int i : x_exps) {
        if (i < l) throw std::invalid_argument("decay bound grid point below l");
        for (double t : times) {
            DecayBoundRow row{};
            row.x_exp = i;
            row.t = t;
            row.log_ztilde = log_ztilde(cache, i, t);
            const double log_t = std::log(t);
            row.log_uniform_bound = std::log(2.0) + log_t - i * n * lp;
            row.log_claim_bound = log_t - i * n * lp + cache.log_one_minus(1 - i);
            row.log_decay_bound = std::log(report.c0) + log_t + i * gamma * lp - landscape.c1() * std::exp(i * lp);
            report.rows.push_back(row);
        }
    }
    return report;
}

} // namespace padic_diffusion
