#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../errors.hpp"
#include "../landscape.hpp"
#include "../ultrametric.hpp"

namespace padic_diffusion::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct LandscapeBlock {
    int p = 2;
    int n = 1;
    double gamma = -0.5;
    double c1 = 1.0;
};

struct SpectralBlock {
    int k_min = -40;
    int k_max = 40;
    int divergence_terms = 20;
    int bound_k_lo = -20;
    int bound_k_hi = 0;
    int demo_terms = 100;
};

struct KernelBlock {
    std::vector<double> times{0.0, 0.1, 0.5, 1.0, 5.0, 20.0};
    int x_min = -10;
    int x_max = 12;
    int bound_l = 2;
};

struct SimBlock {
    double horizon = 10.0;
    std::uint64_t paths = 100000;
    std::uint64_t seed = 20240611;
    std::optional<int> j_max;
    std::vector<double> times{0.5, 1.0, 2.0, 5.0, 10.0};
    int depth_cap = 64;
    unsigned threads = 0;
};

struct FptBlock {
    double h = 0.01;
    double T = 10.0;
    std::vector<double> s_ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    double threshold = 1e3;
};

struct Fault {
    int k;
    double delta;
};

struct VerifyBlock {
    std::uint64_t paths = 100000;
    std::optional<Fault> spectral_fault;
};

struct RunConfig {
    LandscapeBlock landscape;
    SpectralBlock spectral;
    KernelBlock kernel;
    SimBlock sim;
    FptBlock fpt;
    VerifyBlock verify;
    std::optional<std::string> output_dir;
};

namespace detail {

inline void reject_unknown(const json& block, const std::string& prefix, const std::set<std::string>& known) {
    if (!block.is_object()) throw InvalidConfig(prefix.empty() ? "<root>" : prefix, "must be a JSON object");
    for (const auto& [key, value] : block.items()) {
        if (!known.contains(key)) throw InvalidConfig(prefix.empty() ? key : prefix + "." + key, "unknown key");
    }
}

template <class T>
void read(const json& block, const std::string& prefix, const char* key, T& out) {
    if (!block.contains(key)) return;
    const std::string field = prefix + "." + key;
    try {
        out = block.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(field, std::string("wrong type: ") + e.what());
    }
}

inline void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw InvalidConfig(field, message);
}

inline void require_times(const std::vector<double>& times, const std::string& field, bool allow_zero) {
    for (double t : times) {
        require(std::isfinite(t) && (allow_zero ? t >= 0.0 : t > 0.0), field,
                allow_zero ? "times must be >= 0" : "times must be > 0");
    }
}

} // namespace detail

/// Parses and validates a config document; every failure names its field.
inline RunConfig parse_config(const json& doc) {
    using detail::read;
    using detail::require;
    RunConfig cfg;
    detail::reject_unknown(doc, "", {"landscape", "spectral", "kernel", "sim", "fpt", "verify", "output_dir"});
    if (doc.contains("landscape")) {
        const json& b = doc["landscape"];
        detail::reject_unknown(b, "landscape", {"p", "n", "gamma", "c1"});
        read(b, "landscape", "p", cfg.landscape.p);
        read(b, "landscape", "n", cfg.landscape.n);
        read(b, "landscape", "gamma", cfg.landscape.gamma);
        read(b, "landscape", "c1", cfg.landscape.c1);
    }
    if (doc.contains("spectral")) {
        const json& b = doc["spectral"];
        detail::reject_unknown(b, "spectral",
                               {"k_min", "k_max", "divergence_terms", "bound_k_lo", "bound_k_hi", "demo_terms"});
        read(b, "spectral", "k_min", cfg.spectral.k_min);
        read(b, "spectral", "k_max", cfg.spectral.k_max);
        read(b, "spectral", "divergence_terms", cfg.spectral.divergence_terms);
        read(b, "spectral", "bound_k_lo", cfg.spectral.bound_k_lo);
        read(b, "spectral", "bound_k_hi", cfg.spectral.bound_k_hi);
        read(b, "spectral", "demo_terms", cfg.spectral.demo_terms);
    }
    if (doc.contains("kernel")) {
        const json& b = doc["kernel"];
        detail::reject_unknown(b, "kernel", {"times", "x_min", "x_max", "bound_l"});
        read(b, "kernel", "times", cfg.kernel.times);
        read(b, "kernel", "x_min", cfg.kernel.x_min);
        read(b, "kernel", "x_max", cfg.kernel.x_max);
        read(b, "kernel", "bound_l", cfg.kernel.bound_l);
    }
    if (doc.contains("sim")) {
        const json& b = doc["sim"];
        detail::reject_unknown(b, "sim", {"horizon", "paths", "seed", "j_max", "times", "depth_cap", "threads"});
        read(b, "sim", "horizon", cfg.sim.horizon);
        read(b, "sim", "paths", cfg.sim.paths);
        read(b, "sim", "seed", cfg.sim.seed);
        if (b.contains("j_max") && !b["j_max"].is_null()) {
            int j_max = 0;
            read(b, "sim", "j_max", j_max);
            cfg.sim.j_max = j_max;
        }
        read(b, "sim", "times", cfg.sim.times);
        read(b, "sim", "depth_cap", cfg.sim.depth_cap);
        read(b, "sim", "threads", cfg.sim.threads);
    }
    if (doc.contains("fpt")) {
        const json& b = doc["fpt"];
        detail::reject_unknown(b, "fpt", {"h", "T", "s_ladder", "threshold"});
        read(b, "fpt", "h", cfg.fpt.h);
        read(b, "fpt", "T", cfg.fpt.T);
        read(b, "fpt", "s_ladder", cfg.fpt.s_ladder);
        read(b, "fpt", "threshold", cfg.fpt.threshold);
    }
    if (doc.contains("verify")) {
        const json& b = doc["verify"];
        detail::reject_unknown(b, "verify", {"paths", "spectral_fault"});
        read(b, "verify", "paths", cfg.verify.paths);
        if (b.contains("spectral_fault") && !b["spectral_fault"].is_null()) {
            const json& f = b["spectral_fault"];
            detail::reject_unknown(f, "verify.spectral_fault", {"k", "delta"});
            Fault fault{0, 0.0};
            read(f, "verify.spectral_fault", "k", fault.k);
            read(f, "verify.spectral_fault", "delta", fault.delta);
            cfg.verify.spectral_fault = fault;
        }
    }
    if (doc.contains("output_dir")) {
        std::string dir;
        read(doc, "", "output_dir", dir);
        cfg.output_dir = dir;
    }

    require(is_prime(cfg.landscape.p), "landscape.p", "must be a prime, got " + std::to_string(cfg.landscape.p));
    require(cfg.landscape.n >= 1, "landscape.n", "must be >= 1");
    require(std::isfinite(cfg.landscape.c1) && cfg.landscape.c1 > 0.0, "landscape.c1", "must be > 0");
    require(std::isfinite(cfg.landscape.gamma) && cfg.landscape.gamma > -cfg.landscape.n, "landscape.gamma",
            "must satisfy gamma > -n (n=" + std::to_string(cfg.landscape.n) +
                "); at gamma <= -n the kernel ‖x‖^gamma e^{-c1‖x‖} is not integrable near the origin");
    require(cfg.spectral.k_min <= cfg.spectral.k_max, "spectral.k_min", "must be <= spectral.k_max");
    require(cfg.spectral.divergence_terms >= 0, "spectral.divergence_terms", "must be >= 0");
    require(cfg.spectral.bound_k_lo <= cfg.spectral.bound_k_hi, "spectral.bound_k_lo", "must be <= bound_k_hi");
    require(cfg.spectral.demo_terms >= 0, "spectral.demo_terms", "must be >= 0");
    detail::require_times(cfg.kernel.times, "kernel.times", true);
    require(cfg.kernel.x_min <= cfg.kernel.x_max, "kernel.x_min", "must be <= kernel.x_max");
    require(std::isfinite(cfg.sim.horizon) && cfg.sim.horizon > 0.0, "sim.horizon", "must be > 0");
    require(cfg.sim.paths >= 1, "sim.paths", "must be >= 1");
    require(cfg.sim.depth_cap >= 1, "sim.depth_cap", "must be >= 1");
    detail::require_times(cfg.sim.times, "sim.times", false);
    for (double t : cfg.sim.times) require(t <= cfg.sim.horizon, "sim.times", "must not exceed sim.horizon");
    require(std::is_sorted(cfg.sim.times.begin(), cfg.sim.times.end()), "sim.times", "must be sorted");
    require(std::isfinite(cfg.fpt.h) && cfg.fpt.h > 0.0, "fpt.h", "must be > 0");
    require(std::isfinite(cfg.fpt.T) && cfg.fpt.T > 0.0, "fpt.T", "must be > 0");
    const double steps = cfg.fpt.T / cfg.fpt.h;
    require(std::abs(steps - std::round(steps)) <= 1e-9 * steps, "fpt.T", "T/h must be a whole number");
    require(!cfg.fpt.s_ladder.empty(), "fpt.s_ladder", "must not be empty");
    for (std::size_t k = 0; k < cfg.fpt.s_ladder.size(); ++k) {
        require(cfg.fpt.s_ladder[k] > 0.0, "fpt.s_ladder", "entries must be > 0");
        if (k > 0) require(cfg.fpt.s_ladder[k] < cfg.fpt.s_ladder[k - 1], "fpt.s_ladder", "must be strictly decreasing");
    }
    require(cfg.verify.paths >= 1, "verify.paths", "must be >= 1");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("--config", "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig("--config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

/// The config with every default filled in, in the same block layout it is read from.
inline json to_json(const RunConfig& cfg) {
    json doc;
    doc["landscape"] = {{"p", cfg.landscape.p}, {"n", cfg.landscape.n}, {"gamma", cfg.landscape.gamma},
                        {"c1", cfg.landscape.c1}};
    doc["spectral"] = {{"k_min", cfg.spectral.k_min},
                       {"k_max", cfg.spectral.k_max},
                       {"divergence_terms", cfg.spectral.divergence_terms},
                       {"bound_k_lo", cfg.spectral.bound_k_lo},
                       {"bound_k_hi", cfg.spectral.bound_k_hi},
                       {"demo_terms", cfg.spectral.demo_terms}};
    doc["kernel"] = {{"times", cfg.kernel.times},
                     {"x_min", cfg.kernel.x_min},
                     {"x_max", cfg.kernel.x_max},
                     {"bound_l", cfg.kernel.bound_l}};
    doc["sim"] = {{"horizon", cfg.sim.horizon}, {"paths", cfg.sim.paths},     {"seed", cfg.sim.seed},
                  {"times", cfg.sim.times},     {"depth_cap", cfg.sim.depth_cap}, {"threads", cfg.sim.threads}};
    doc["sim"]["j_max"] = cfg.sim.j_max ? json(*cfg.sim.j_max) : json(nullptr);
    doc["fpt"] = {{"h", cfg.fpt.h}, {"T", cfg.fpt.T}, {"s_ladder", cfg.fpt.s_ladder}, {"threshold", cfg.fpt.threshold}};
    doc["verify"] = {{"paths", cfg.verify.paths}};
    doc["verify"]["spectral_fault"] = cfg.verify.spectral_fault
                                          ? json{{"k", cfg.verify.spectral_fault->k},
                                                 {"delta", cfg.verify.spectral_fault->delta}}
                                          : json(nullptr);
    return doc;
}

inline ExponentialLandscape make_landscape(const RunConfig& cfg) {
    return ExponentialLandscape::normalize(SpaceParams(cfg.landscape.p, cfg.landscape.n), cfg.landscape.gamma,
                                           cfg.landscape.c1);
}

} // namespace padic_diffusion::io
