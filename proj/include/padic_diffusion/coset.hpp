#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "ultrametric.hpp"

namespace padic_diffusion {

inline constexpr int kDefaultDepthCap = 64;

/**
 * An element of Q_p^n / Z_p^n, stored through its canonical representative:
 * per coordinate, the fractional digits a_{-m} p^{-m} + ... + a_{-1} p^{-1}.
 *
 * digits(c)[k] is the digit of coordinate c at position -(k + 1). Trailing
 * zero digits are trimmed so equal cosets have equal storage.
 */
class CosetPoint {
public:
    using Digits = std::vector<std::uint32_t>;

    explicit CosetPoint(SpaceParams space, int depth_cap = kDefaultDepthCap)
        : space_(space), depth_cap_(depth_cap), coords_(static_cast<std::size_t>(space.n())) {
        if (depth_cap < 1) throw std::invalid_argument("depth cap must be >= 1");
    }

    /// Builds a coset from per-coordinate digit arrays (index k is position -(k+1)).
    static CosetPoint from_digits(SpaceParams space, std::vector<Digits> coords,
                                  int depth_cap = kDefaultDepthCap) {
        if (coords.size() != static_cast<std::size_t>(space.n())) {
            throw std::invalid_argument("expected one digit array per coordinate");
        }
        CosetPoint point(space, depth_cap);
        point.coords_ = std::move(coords);
        for (const Digits& digits : point.coords_) {
            for (std::uint32_t d : digits) {
                if (d >= static_cast<std::uint32_t>(space.p())) {
                    throw std::invalid_argument("digit out of range for p=" + std::to_string(space.p()));
                }
            }
        }
        point.trim();
        if (point.depth() > depth_cap) {
            throw DepthOverflow("digit at position -" + std::to_string(point.depth()) +
                                " exceeds depth cap " + std::to_string(depth_cap));
        }
        return point;
    }

    const SpaceParams& space() const noexcept { return space_; }
    int depth_cap() const noexcept { return depth_cap_; }
    const Digits& digits(int coord) const { return coords_.at(static_cast<std::size_t>(coord)); }

    /// Digit at a negative position (-1, -2, ...); zero beyond the stored depth.
    std::uint32_t digit(int coord, int position) const {
        if (position >= 0) throw std::invalid_argument("coset digits live at negative positions");
        const Digits& d = digits(coord);
        const auto k = static_cast<std::size_t>(-position - 1);
        return k < d.size() ? d[k] : 0;
    }

    /// Deepest position holding a nonzero digit, 0 for the identity coset.
    int depth() const noexcept {
        std::size_t deepest = 0;
        for (const Digits& d : coords_) deepest = std::max(deepest, d.size());
        return static_cast<int>(deepest);
    }

    bool is_identity() const noexcept { return depth() == 0; }

    /// ‖x‖_p of any representative; the identity coset reports inside_unit_ball().
    NormExponent norm_exponent() const noexcept {
        const int d = depth();
        return d == 0 ? NormExponent::inside_unit_ball() : NormExponent(d);
    }

    friend bool operator==(const CosetPoint& a, const CosetPoint& b) {
        return a.space_ == b.space_ && a.coords_ == b.coords_;
    }

private:
    friend CosetPoint coset_add(const CosetPoint&, const CosetPoint&);
    friend CosetPoint coset_negate(const CosetPoint&);

    void trim() {
        for (Digits& d : coords_) {
            while (!d.empty() && d.back() == 0) d.pop_back();
        }
    }

    SpaceParams space_;
    int depth_cap_;
    std::vector<Digits> coords_;
};

namespace detail {

inline void check_compatible(const CosetPoint& a, const CosetPoint& b) {
    if (!(a.space() == b.space()) || a.depth_cap() != b.depth_cap()) {
        throw std::invalid_argument("coset operands differ in space or depth cap");
    }
}

} // namespace detail

/// Digitwise base-p addition, carries moving toward position -1 and dropped past it.
inline CosetPoint coset_add(const CosetPoint& a, const CosetPoint& b) {
    detail::check_compatible(a, b);
    const auto p = static_cast<std::uint32_t>(a.space().p());
    CosetPoint sum(a.space(), a.depth_cap());
    for (std::size_t c = 0; c < sum.coords_.size(); ++c) {
        const auto& da = a.coords_[c];
        const auto& db = b.coords_[c];
        const std::size_t len = std::max(da.size(), db.size());
        CosetPoint::Digits out(len, 0);
        std::uint32_t carry = 0;
        for (std::size_t k = len; k-- > 0;) {
            const std::uint32_t s = (k < da.size() ? da[k] : 0) + (k < db.size() ? db[k] : 0) + carry;
            out[k] = s % p;
            carry = s / p;
        }
        sum.coords_[c] = std::move(out);
    }
    sum.trim();
    if (sum.depth() > sum.depth_cap()) {
        throw DepthOverflow("coset sum exceeds depth cap " + std::to_string(sum.depth_cap()));
    }
    return sum;
}

inline CosetPoint coset_negate(const CosetPoint& a) {
    const auto p = static_cast<std::uint32_t>(a.space().p());
    CosetPoint neg(a.space(), a.depth_cap());
    for (std::size_t c = 0; c < neg.coords_.size(); ++c) {
        const auto& d = a.coords_[c];
        CosetPoint::Digits out(d.size(), 0);
        std::uint32_t borrow = 0;
        for (std::size_t k = d.size(); k-- > 0;) {
            const std::uint32_t take = d[k] + borrow;
            out[k] = take == 0 ? 0 : (p - take) % p;
            borrow = take == 0 ? 0 : 1;
        }
        neg.coords_[c] = std::move(out);
    }
    neg.trim();
    return neg;
}

inline CosetPoint coset_sub(const CosetPoint& a, const CosetPoint& b) {
    return coset_add(a, coset_negate(b));
}

/**
 * Haar-uniform point of the sphere S_j^n, reduced mod Z_p^n.
 *
 * Digits at positions -j..-1 are uniform subject to at least one coordinate
 * carrying a nonzero digit at -j; each of the p^{jn} - p^{(j-1)n} admissible
 * patterns has equal probability.
 */
inline CosetPoint sample_uniform_sphere_coset(const SpaceParams& space, int j, StreamRng& rng,
                                              int depth_cap = kDefaultDepthCap) {
    if (j <= 0) {
        throw std::invalid_argument("sphere sampling on the quotient needs j >= 1, got " +
                                    std::to_string(j));
    }
    if (j > depth_cap) {
        throw DepthOverflow("jump of norm p^" + std::to_string(j) + " exceeds depth cap " +
                            std::to_string(depth_cap));
    }
    const auto n = static_cast<std::size_t>(space.n());
    const auto p = static_cast<std::uint64_t>(space.p());
    std::vector<CosetPoint::Digits> coords(n, CosetPoint::Digits(static_cast<std::size_t>(j), 0));
    const auto lead = static_cast<std::size_t>(j - 1);
    bool any_nonzero = false;
    while (!any_nonzero) {
        for (std::size_t c = 0; c < n; ++c) {
            coords[c][lead] = static_cast<std::uint32_t>(rng.uniform_below(p));
            any_nonzero = any_nonzero || coords[c][lead] != 0;
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t k = 0; k < lead; ++k) {
            coords[c][k] = static_cast<std::uint32_t>(rng.uniform_below(p));
        }
    }
    return CosetPoint::from_digits(space, std::move(coords), depth_cap);
}

/**
 * All cosets of Z_p^n inside the ball B_M^n, i.e. the finite group
 * B_M^n / Z_p^n with p^{Mn} elements, indexed 0..size()-1.
 */
class CosetChain {
public:
    CosetChain(SpaceParams space, int radius_exp) : space_(space), radius_exp_(radius_exp) {
        if (radius_exp < 0 || radius_exp > kDefaultDepthCap) {
            throw std::invalid_argument("coset chain radius must lie in [0, depth cap]");
        }
        std::size_t count = 1;
        const auto digits = static_cast<std::size_t>(radius_exp) * static_cast<std::size_t>(space.n());
        for (std::size_t k = 0; k < digits; ++k) {
            count *= static_cast<std::size_t>(space.p());
            if (count > (std::size_t{1} << 24)) throw std::invalid_argument("coset chain too large");
        }
        size_ = count;
    }

    const SpaceParams& space() const noexcept { return space_; }
    int radius_exp() const noexcept { return radius_exp_; }
    std::size_t size() const noexcept { return size_; }

    CosetPoint point(std::size_t index) const {
        const auto p = static_cast<std::size_t>(space_.p());
        std::vector<CosetPoint::Digits> coords(static_cast<std::size_t>(space_.n()),
                                               CosetPoint::Digits(static_cast<std::size_t>(radius_exp_), 0));
        for (auto& digits : coords) {
            for (auto& d : digits) {
                d = static_cast<std::uint32_t>(index % p);
                index /= p;
            }
        }
        return CosetPoint::from_digits(space_, std::move(coords), kDefaultDepthCap);
    }

    std::size_t index_of(const CosetPoint& point) const {
        if (point.depth() > radius_exp_) throw std::out_of_range("coset outside the chain ball");
        const auto p = static_cast<std::size_t>(space_.p());
        std::size_t index = 0;
        for (int c = space_.n(); c-- > 0;) {
            for (int k = radius_exp_; k-- > 0;) {
                index = index * p + point.digit(c, -(k + 1));
            }
        }
        return index;
    }

private:
    SpaceParams space_;
    int radius_exp_;
    std::size_t size_ = 1;
};

} // namespace padic_diffusion
