#pragma once

#include <cmath>
#include <vector>

#include "detail/log_sum.hpp"
#include "ultrametric.hpp"

namespace padic_diffusion {

/**
 * A radial kernel given by a table of sphere values: J(p^j) = values[j - lo]
 * for lo <= j <= hi, the constant `below` for every j < lo, and 0 above hi.
 *
 * Masses are closed-form, so the spectral machinery can be checked against
 * kernels whose transforms are known exactly, e.g. the indicator of Z_p^n.
 */
class TabulatedKernel {
public:
    TabulatedKernel(SpaceParams space, int lo, std::vector<double> values, double below = 0.0)
        : space_(space), lo_(lo), values_(std::move(values)), below_(below) {
        if (values_.empty()) throw std::invalid_argument("tabulated kernel needs at least one sphere");
        for (double v : values_) {
            if (!(v >= 0.0)) throw std::invalid_argument("tabulated kernel values must be nonnegative");
        }
        if (!(below >= 0.0)) throw std::invalid_argument("tabulated kernel values must be nonnegative");
    }

    /// 1 on Z_p^n, 0 outside.
    static TabulatedKernel unit_ball_indicator(SpaceParams space) { return TabulatedKernel(space, 0, {1.0}, 1.0); }

    const SpaceParams& space() const noexcept { return space_; }
    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return lo_ + static_cast<int>(values_.size()) - 1; }

    double value(int j) const noexcept {
        if (j < lo_) return below_;
        if (j > hi()) return 0.0;
        return values_[static_cast<std::size_t>(j - lo_)];
    }

    double log_value(int j) const noexcept {
        const double v = value(j);
        return v > 0.0 ? std::log(v) : detail::neg_inf;
    }

    double interior_mass(int a) const {
        if (a <= lo_) return below_ * ball_volume(space_, a - 1);
        double mass = below_ * ball_volume(space_, lo_ - 1);
        for (int j = lo_; j < a && j <= hi(); ++j) mass += value(j) * sphere_volume(space_, j);
        return mass;
    }

    double log_exterior_mass(int a) const {
        double mass = 0.0;
        for (int j = std::max(a, lo_); j <= hi(); ++j) mass += value(j) * sphere_volume(space_, j);
        if (a < lo_) mass += below_ * (ball_volume(space_, lo_ - 1) - ball_volume(space_, a - 1));
        return mass > 0.0 ? std::log(mass) : detail::neg_inf;
    }

private:
    SpaceParams space_;
    int lo_;
    std::vector<double> values_;
    double below_;
};

} // namespace padic_diffusion
