#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "coset.hpp"
#include "errors.hpp"
#include "landscape.hpp"
#include "rng.hpp"

namespace padic_diffusion {

/**
 * The jump-norm law P(‖jump‖ = p^j) = J(p^j) vol(S_j), tabulated on
 * [j_min, j_max] and renormalized. truncation_defect is the mass dropped at
 * both ends before renormalizing.
 */
class JumpTable {
public:
    static constexpr double kMaxDefect = 1e-12;

    /// Smallest j_max whose upper tail is below a tenth of the allowed defect.
    static int default_j_max(const ExponentialLandscape& landscape) {
        int j = std::max(landscape.window_hi(), 1);
        while (j > 1 && landscape.exterior_mass(j) < kMaxDefect / 10) --j;
        while (landscape.exterior_mass(j + 1) >= kMaxDefect / 10) ++j;
        return j;
    }

    static JumpTable build(const ExponentialLandscape& landscape, int j_max) {
        const double upper = landscape.exterior_mass(j_max + 1);
        if (!(upper < kMaxDefect / 2)) {
            throw InvalidConfig("sim.j_max", "jump mass above p^" + std::to_string(j_max) + " is " +
                                                 std::to_string(upper) + ", must stay below 5e-13");
        }
        int j_min = std::min(0, j_max);
        while (landscape.interior_mass(j_min) >= kMaxDefect / 2) --j_min;
        JumpTable table;
        table.space_ = landscape.space();
        table.j_min_ = j_min;
        table.j_max_ = j_max;
        table.truncation_defect_ = upper + landscape.interior_mass(j_min);
        double total = 0.0;
        for (int j = j_min; j <= j_max; ++j) {
            const double mass = std::exp(landscape.log_value(j) + log_sphere_volume(landscape.space(), j));
            table.probs_.push_back(mass);
            total += mass;
        }
        double acc = 0.0;
        for (double& prob : table.probs_) {
            prob /= total;
            acc += prob;
            table.cdf_.push_back(acc);
        }
        table.cdf_.back() = 1.0;
        return table;
    }

    const SpaceParams& space() const noexcept { return space_; }
    int j_min() const noexcept { return j_min_; }
    int j_max() const noexcept { return j_max_; }
    double truncation_defect() const noexcept { return truncation_defect_; }

    double probability(int j) const {
        if (j < j_min_ || j > j_max_) return 0.0;
        return probs_[static_cast<std::size_t>(j - j_min_)];
    }

    /// P(j >= 1) under the table, the chance a jump moves the coset.
    double exit_probability() const {
        double mass = 0.0;
        for (int j = std::max(1, j_min_); j <= j_max_; ++j) mass += probability(j);
        return mass;
    }

    /// Inverse-CDF draw of a jump-norm exponent.
    int sample(StreamRng& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
        return j_min_ + static_cast<int>(idx);
    }

private:
    JumpTable() : space_(2, 1) {}

    SpaceParams space_;
    int j_min_ = 0;
    int j_max_ = 0;
    double truncation_defect_ = 0.0;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

inline NormExponent sample_jump_norm(const JumpTable& table, StreamRng& rng) {
    return NormExponent(table.sample(rng));
}

struct SimConfig {
    double horizon;
    std::uint64_t paths;
    std::uint64_t seed;
    int depth_cap = kDefaultDepthCap;
    unsigned threads = 0;
};

/**
 * One path of the compound Poisson process on Q_p^n / Z_p^n: Exp(1) waiting
 * times, jump norms from the table, uniform sphere cosets for norms >= p.
 * positions[k] is the coset right after jump_times[k]. censored is set when
 * the horizon arrived before the path first returned to Z_p^n.
 */
struct PathSample {
    std::vector<double> jump_times;
    std::vector<CosetPoint> positions;
    bool censored = true;
};

struct FirstPassageSample {
    double tau = std::numeric_limits<double>::quiet_NaN();
    bool censored = true;
    bool exited = false;
};

namespace detail {

/// Runs one path, calling visit(time, position) after every jump.
template <class Visit>
void walk_path(const SimConfig& config, const JumpTable& table, std::uint64_t path_index, Visit&& visit) {
    StreamRng rng(config.seed, path_index);
    CosetPoint position(table.space(), config.depth_cap);
    double t = 0.0;
    for (;;) {
        t += rng.exponential();
        if (t > config.horizon) return;
        const int j = table.sample(rng);
        if (j >= 1) position = coset_add(position, sample_uniform_sphere_coset(table.space(), j, rng, config.depth_cap));
        if (!visit(t, position)) return;
    }
}

} // namespace detail

inline PathSample simulate_path(const SimConfig& config, const JumpTable& table, std::uint64_t path_index) {
    PathSample path;
    bool exited = false;
    detail::walk_path(config, table, path_index, [&](double t, const CosetPoint& position) {
        path.jump_times.push_back(t);
        path.positions.push_back(position);
        if (!position.is_identity()) exited = true;
        else if (exited) path.censored = false;
        return true;
    });
    return path;
}

/// First jump time at which the path is back in Z_p^n after having left it.
inline FirstPassageSample first_passage(const PathSample& path) {
    FirstPassageSample sample;
    for (std::size_t k = 0; k < path.positions.size(); ++k) {
        if (!path.positions[k].is_identity()) {
            sample.exited = true;
        } else if (sample.exited) {
            sample.tau = path.jump_times[k];
            sample.censored = false;
            return sample;
        }
    }
    return sample;
}

/**
 * Aggregates over paths 0..paths-1. Paths are split into contiguous blocks
 * across threads; every statistic is a per-path record or an integer count,
 * so the result does not depend on the thread count.
 */
struct MonteCarloResult {
    std::vector<double> times;
    std::vector<FirstPassageSample> first_passage;
    std::vector<std::uint64_t> inside_counts;
    std::vector<std::vector<std::uint64_t>> norm_counts;  // [time][norm exponent], 0 meaning Z_p^n
    std::uint64_t total_jumps = 0;
    std::uint64_t paths = 0;
};

inline MonteCarloResult run_monte_carlo(const SimConfig& config, const JumpTable& table,
                                        std::vector<double> times) {
    if (!(config.horizon > 0.0)) throw InvalidConfig("sim.horizon", "must be > 0");
    if (config.paths == 0) throw InvalidConfig("sim.paths", "must be >= 1");
    if (table.j_max() > config.depth_cap) {
        throw InvalidConfig("sim.j_max", "exceeds the coset depth cap " + std::to_string(config.depth_cap));
    }
    for (double t : times) {
        if (!(t > 0.0 && t <= config.horizon)) throw InvalidConfig("times", "must lie in (0, horizon]");
    }
    if (!std::is_sorted(times.begin(), times.end())) throw InvalidConfig("times", "must be sorted");

    MonteCarloResult result;
    result.times = times;
    result.paths = config.paths;
    result.first_passage.resize(config.paths);
    const std::size_t n_times = times.size();
    const auto width = static_cast<std::size_t>(config.depth_cap) + 1;

    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, config.paths));
    struct Partial {
        std::vector<std::uint64_t> inside;
        std::vector<std::vector<std::uint64_t>> norms;
        std::uint64_t jumps = 0;
    };
    std::vector<Partial> partials(workers);

    auto work = [&](unsigned w) {
        Partial& part = partials[w];
        part.inside.assign(n_times, 0);
        part.norms.assign(n_times, std::vector<std::uint64_t>(width, 0));
        const std::uint64_t begin = config.paths * w / workers;
        const std::uint64_t end = config.paths * (w + 1) / workers;
        for (std::uint64_t path = begin; path < end; ++path) {
            FirstPassageSample& fp = result.first_passage[path];
            std::size_t next = 0;
            int current_depth = 0;
            detail::walk_path(config, table, path, [&](double t, const CosetPoint& position) {
                while (next < n_times && times[next] < t) {
                    part.norms[next][static_cast<std::size_t>(current_depth)]++;
                    if (current_depth == 0) part.inside[next]++;
                    ++next;
                }
                ++part.jumps;
                current_depth = position.depth();
                if (current_depth != 0) {
                    fp.exited = true;
                } else if (fp.exited && fp.censored) {
                    fp.tau = t;
                    fp.censored = false;
                }
                return true;
            });
            for (; next < n_times; ++next) {
                part.norms[next][static_cast<std::size_t>(current_depth)]++;
                if (current_depth == 0) part.inside[next]++;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (std::thread& thread : pool) thread.join();

    result.inside_counts.assign(n_times, 0);
    result.norm_counts.assign(n_times, std::vector<std::uint64_t>(width, 0));
    for (const Partial& part : partials) {
        result.total_jumps += part.jumps;
        for (std::size_t k = 0; k < n_times; ++k) {
            result.inside_counts[k] += part.inside[k];
            for (std::size_t d = 0; d < width; ++d) result.norm_counts[k][d] += part.norms[k][d];
        }
    }
    return result;
}

struct ProportionEstimate {
    double t;
    double estimate;
    double std_error;
};

inline ProportionEstimate binomial_estimate(double t, std::uint64_t hits, std::uint64_t trials) {
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {t, p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

/// Fraction of paths sitting in Z_p^n at each requested time, with binomial standard errors.
inline std::vector<ProportionEstimate> estimate_survival(const MonteCarloResult& result) {
    std::vector<ProportionEstimate> out;
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        out.push_back(binomial_estimate(result.times[k], result.inside_counts[k], result.paths));
    }
    return out;
}

inline std::vector<ProportionEstimate> estimate_survival(const SimConfig& config, const JumpTable& table,
                                                         const std::vector<double>& times) {
    return estimate_survival(run_monte_carlo(config, table, times));
}

/// Empirical P(τ <= t) from the per-path first-passage records.
inline ProportionEstimate estimate_return_by(const MonteCarloResult& result, double t) {
    std::uint64_t hits = 0;
    for (const FirstPassageSample& fp : result.first_passage) {
        if (!fp.censored && fp.tau <= t) ++hits;
    }
    return binomial_estimate(t, hits, result.paths);
}

} // namespace padic_diffusion
