// padic_diffusion: command-line front end for the landscape, heat-kernel,
// simulation and first-passage computations.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "CLI11.hpp"
#include "padic_diffusion.hpp"
#include "padic_diffusion/io/config.hpp"
#include "padic_diffusion/io/report.hpp"

namespace fs = std::filesystem;
using namespace padic_diffusion;
using namespace padic_diffusion::io;

namespace {

using Cache = SpectralCache<ExponentialLandscape>;

constexpr const char* kVersion = PADIC_DIFFUSION_VERSION;
constexpr const char* kOutEnv = "PADIC_DIFFUSION_OUT";

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct Run {
    std::string command;
    RunConfig cfg;
    fs::path dir;
    ExponentialLandscape landscape;
    Cache cache;
    std::vector<std::string> artifacts;
    json run_info = json::object();
    std::chrono::steady_clock::time_point start;

    Run(std::string name, RunConfig config, fs::path out, ExponentialLandscape land)
        : command(std::move(name)),
          cfg(std::move(config)),
          dir(std::move(out)),
          landscape(land),
          cache(land, cfg.spectral.k_min, cfg.spectral.k_max),
          start(std::chrono::steady_clock::now()) {}

    fs::path path(const std::string& name) {
        artifacts.push_back(name);
        return dir / name;
    }
};

fs::path output_dir(const Options& opts, const RunConfig& cfg, const std::string& command) {
    if (!opts.out.empty()) return opts.out;
    fs::path root = "padic_diffusion_runs";
    if (cfg.output_dir) {
        root = *cfg.output_dir;
    } else if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') {
        root = env;
    }
    return root / command;
}

JumpTable jump_table_for(const RunConfig& cfg, const ExponentialLandscape& landscape) {
    const int j_max = cfg.sim.j_max ? *cfg.sim.j_max : JumpTable::default_j_max(landscape);
    return JumpTable::build(landscape, j_max);
}

json resolved_config(const Run& run) {
    json doc = to_json(run.cfg);
    doc["schema_version"] = kSchemaVersion;
    const auto& land = run.landscape;
    const JumpTable table = jump_table_for(run.cfg, land);
    doc["derived"] = {
        {"norm_const", land.norm_const()},
        {"normalization_window", {land.window_lo(), land.window_hi()}},
        {"exit_rate", land.exit_rate()},
        {"jump_table", {{"j_min", table.j_min()}, {"j_max", table.j_max()}, {"truncation_defect", table.truncation_defect()}}},
    };
    return doc;
}

void finish(Run& run) {
    const json resolved = resolved_config(run);
    write_json(run.path("resolved_config.json"), resolved);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
    write_manifest(run.dir, run.command, kVersion, resolved, run.artifacts, wall, run.run_info);
    std::cout << run.command << ": wrote " << run.artifacts.size() + 1 << " files to " << run.dir.string() << '\n';
}

bool gamma_in_negative_range(const ExponentialLandscape& land) {
    return land.gamma() < 0.0 && land.gamma() > -land.space().n();
}

std::string not_applicable(const ExponentialLandscape& land) {
    return "not applicable: needs -n < gamma < 0, got gamma=" + format_number(land.gamma()) +
           " with n=" + std::to_string(land.space().n());
}

// landscape ------------------------------------------------------------------

void cmd_landscape(Run& run) {
    const Cache& cache = run.cache;
    const auto& land = run.landscape;
    {
        CsvWriter csv(run.path("spectral.csv"), {"k", "jhat", "one_minus_jhat"});
        for (int k = cache.k_min(); k <= cache.k_max(); ++k) csv.row({k, cache.value(k), cache.one_minus(k)});
    }

    json diag;
    diag["schema_version"] = kSchemaVersion;
    diag["norm_const"] = land.norm_const();
    diag["exit_rate"] = land.exit_rate();

    const double gap = spectral_gap_at_one(land);
    const double from_series = cache.one_minus(0);
    diag["gap_at_one"] = {{"closed_form", gap},
                          {"from_series", from_series},
                          {"abs_difference", std::abs(gap - from_series)},
                          {"positive", gap > 0.0},
                          {"agrees_within_1e-10", std::abs(gap - from_series) <= 1e-10}};

    double min_jhat = 1.0, max_jhat = -1.0, min_gap = 1.0;
    for (int k = cache.k_min(); k <= cache.k_max(); ++k) {
        min_jhat = std::min(min_jhat, cache.value(k));
        max_jhat = std::max(max_jhat, cache.value(k));
        min_gap = std::min(min_gap, cache.one_minus(k));
    }
    diag["spectral_range"] = {{"k_min", cache.k_min()},
                              {"k_max", cache.k_max()},
                              {"min_jhat", min_jhat},
                              {"max_jhat", max_jhat},
                              {"min_one_minus_jhat", min_gap},
                              {"within_unit_interval", min_jhat >= -1.0 && max_jhat <= 1.0 && min_gap >= 0.0}};

    if (gamma_in_negative_range(land)) {
        const SpectralBoundReport bound = check_spectral_upper_bound(cache, run.cfg.spectral.bound_k_lo, run.cfg.spectral.bound_k_hi);
        json rows = json::array();
        for (const auto& r : bound.rows) {
            rows.push_back({{"k", r.k}, {"log_one_minus_jhat", number(r.log_one_minus)}, {"log_bound", r.log_bound},
                            {"log_margin", number(r.log_margin)}});
        }
        diag["spectral_upper_bound"] = {{"b1", bound.constants.b1}, {"b2", bound.constants.b2}, {"a0", bound.constants.a0},
                                        {"all_hold", bound.all_hold()}, {"rows", rows}};

        const DivergenceReport div = divergence_diagnostic(cache, run.cfg.spectral.divergence_terms);
        json terms = json::array();
        for (std::size_t j = 0; j < div.log_terms.size(); ++j) {
            terms.push_back({{"j", j},
                             {"log_term", div.log_terms[j]},
                             {"log_partial_sum", div.partial_log_sums[j]},
                             {"log_lower_bound_term", div.lower_bound_log_terms[j]}});
        }
        diag["divergence"] = {{"verdict", to_string(div.verdict)}, {"growth_floor", div.growth_floor}, {"terms", terms}};
    } else {
        diag["spectral_upper_bound"] = {{"note", not_applicable(land)}};
        diag["divergence"] = {{"note", not_applicable(land)}};
    }

    if (land.space().n() == 1) {
        const int m = run.cfg.spectral.demo_terms;
        const auto sums = nonintegrable_partial_sums(land.space(), land.c1(), m);
        const double increment = m >= 1 ? sums[static_cast<std::size_t>(m)] - sums[static_cast<std::size_t>(m - 1)] : sums[0];
        diag["nonintegrable_demo"] = {{"rate", land.c1()},
                                      {"m", m},
                                      {"partial_sum", sums.back()},
                                      {"last_increment", increment},
                                      {"limit_increment", land.space().unit_sphere_volume()},
                                      {"partial_sums", sums}};
    } else {
        diag["nonintegrable_demo"] = {{"note", "not applicable: the demo is one-dimensional"}};
    }
    write_json(run.path("diagnostics.json"), diag);
}

// kernel ---------------------------------------------------------------------

void cmd_kernel(Run& run) {
    const Cache& cache = run.cache;
    const auto& land = run.landscape;
    const auto& kc = run.cfg.kernel;
    const int n = land.space().n();
    const double lp = land.space().log_p();
    {
        CsvWriter u(run.path("u_profile.csv"), {"norm_exp", "t", "value"});
        CsvWriter z(run.path("ztilde.csv"), {"norm_exp", "t", "value"});
        for (double t : kc.times) {
            for (int i = kc.x_min; i <= kc.x_max; ++i) {
                u.row({i, t, u_profile(cache, NormExponent(i), t)});
                z.row({i, t, ztilde(cache, NormExponent(i), t)});
            }
        }
    }
    {
        CsvWriter csv(run.path("survival.csv"), {"t", "survival", "atom", "ztilde_mass", "total_mass", "conservation_defect"});
        for (double t : kc.times) {
            const MassAudit audit = mass_audit(cache, t);
            csv.row({t, survival(cache, t), audit.atom, audit.continuous_mass, audit.total, audit.defect});
        }
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    std::vector<double> positive_times;
    for (double t : kc.times) {
        if (t > 0.0) positive_times.push_back(t);
    }
    json uniform = json::array();
    bool uniform_ok = true;
    for (int i = std::max(1, kc.x_min); i <= kc.x_max; ++i) {
        for (double t : positive_times) {
            const double lz = log_ztilde(cache, i, t);
            const double lb = std::log(2.0 * t) - i * n * lp;
            uniform_ok = uniform_ok && log_le(lz, lb);
            uniform.push_back({{"norm_exp", i}, {"t", t}, {"log_ztilde", number(lz)}, {"log_bound", lb},
                               {"log_margin", number(lb - lz)}});
        }
    }
    report["uniform_bound"] = {{"statement", "ztilde(x,t) <= 2 t |x|^-n"}, {"all_hold", uniform_ok}, {"rows", uniform}};

    if (gamma_in_negative_range(land)) {
        const int l = kc.bound_l;
        std::vector<int> xs;
        for (int i = std::max(l, kc.x_min); i <= kc.x_max; ++i) xs.push_back(i);
        const DecayBoundReport decay = decay_bound_check(cache, l, xs, positive_times);
        json rows = json::array();
        for (const auto& r : decay.rows) {
            rows.push_back({{"norm_exp", r.x_exp},
                            {"t", r.t},
                            {"log_ztilde", number(r.log_ztilde)},
                            {"log_claim_bound", number(r.log_claim_bound)},
                            {"log_decay_bound", r.log_decay_bound},
                            {"claim_margin", number(r.log_claim_bound - r.log_ztilde)},
                            {"decay_margin", number(r.log_decay_bound - r.log_ztilde)}});
        }
        report["decay_bound"] = {{"statement", "ztilde(x,t) <= C0 t |x|^gamma exp(-c1 |x|) for |x| >= p^l"},
                                 {"l", l},
                                 {"c0", decay.c0},
                                 {"claim_holds", decay.claim_holds()},
                                 {"decay_holds", decay.decay_holds()},
                                 {"rows", rows}};
    } else {
        report["decay_bound"] = {{"note", not_applicable(land)}};
    }
    write_json(run.path("bounds_report.json"), report);
}

// simulate -------------------------------------------------------------------

SimConfig sim_config(const RunConfig& cfg, double horizon, std::uint64_t paths) {
    return SimConfig{horizon, paths, cfg.sim.seed, cfg.sim.depth_cap, cfg.sim.threads};
}

void cmd_simulate(Run& run) {
    const auto& sc = run.cfg.sim;
    const JumpTable table = jump_table_for(run.cfg, run.landscape);
    const MonteCarloResult result = run_monte_carlo(sim_config(run.cfg, sc.horizon, sc.paths), table, sc.times);
    {
        CsvWriter csv(run.path("fpt_samples.csv"), {"path_index", "tau", "censored", "exited"});
        for (std::uint64_t k = 0; k < result.paths; ++k) {
            const FirstPassageSample& fp = result.first_passage[k];
            csv.row({static_cast<unsigned long long>(k), fp.censored ? Cell("") : Cell(fp.tau), fp.censored, fp.exited});
        }
    }
    {
        CsvWriter csv(run.path("survival_mc.csv"), {"t", "estimate", "stderr", "paths"});
        for (const ProportionEstimate& e : estimate_survival(result)) {
            csv.row({e.t, e.estimate, e.std_error, static_cast<unsigned long long>(result.paths)});
        }
    }
    const ProportionEstimate by_horizon = estimate_return_by(result, sc.horizon);
    run.run_info = {{"seed", sc.seed},
                    {"paths", sc.paths},
                    {"horizon", sc.horizon},
                    {"j_min", table.j_min()},
                    {"j_max", table.j_max()},
                    {"truncation_defect", table.truncation_defect()},
                    {"total_jumps", result.total_jumps},
                    {"return_by_horizon", {{"estimate", by_horizon.estimate}, {"stderr", by_horizon.std_error}}}};
}

// fpt ------------------------------------------------------------------------

void cmd_fpt(Run& run) {
    const auto& fc = run.cfg.fpt;
    const VolterraGrid grid = solve_first_passage(run.cache, fc.h, fc.T);
    const auto clamped = grid.f_clamped();
    const auto cumulative = cumulative_return(grid);
    {
        CsvWriter csv(run.path("g_f.csv"), {"t", "g", "f", "cumulative_f"});
        for (std::size_t m = 0; m < grid.g.size(); ++m) csv.row({grid.time(m), grid.g[m], clamped[m], cumulative[m]});
    }
    const RecurrenceReport rec = recurrence_diagnostic(run.cache, fc.s_ladder, fc.threshold);
    json ladder = json::array();
    {
        CsvWriter csv(run.path("laplace_ladder.csv"), {"s", "G", "F"});
        for (const LaplaceEval& e : rec.ladder) {
            const double f = e.value / (1.0 + e.value);
            csv.row({e.s, e.value, f});
            ladder.push_back({{"s", e.s}, {"G", e.value}, {"F", f}, {"outer_terms", e.outer_terms},
                              {"max_inner_terms", e.max_inner_terms}});
        }
    }
    double min_f = 0.0;
    for (double f : grid.f) min_f = std::min(min_f, f);
    json verdict;
    verdict["schema_version"] = kSchemaVersion;
    verdict["verdict"] = to_string(rec.verdict);
    verdict["threshold"] = rec.threshold;
    verdict["strictly_increasing"] = rec.strictly_increasing;
    verdict["threshold_reached"] = rec.threshold_reached;
    verdict["hypothesis_met"] = rec.hypothesis_met;
    verdict["note"] = rec.note;
    verdict["return_probability_proxy"] = rec.return_probability_proxy();
    verdict["ladder"] = ladder;
    verdict["volterra"] = {{"h", fc.h},
                           {"T", fc.T},
                           {"integral_of_f", return_probability(grid)},
                           {"integral_caveat", "lower proxy for P(tau < infinity): mass beyond T is not counted"},
                           {"residual", volterra_residual(grid)},
                           {"residual_tolerance", 10.0 * fc.h * fc.h},
                           {"min_raw_f", min_f}};
    write_json(run.path("recurrence_verdict.json"), verdict);
}

// verify ---------------------------------------------------------------------

struct Checks {
    json list = json::array();
    std::vector<std::string> failed;

    void add(const std::string& name, bool passed, double value, double tolerance, json detail = json::object()) {
        list.push_back({{"name", name}, {"passed", passed}, {"value", number(value)}, {"tolerance", tolerance},
                        {"detail", std::move(detail)}});
        if (!passed) failed.push_back(name);
    }
};

template <class F>
double central_difference(F&& f, double t, double h = 1e-4) {
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

int chain_radius(const SpaceParams& space) {
    int radius = 1;
    double states = std::pow(space.p(), space.n());
    while (states * std::pow(space.p(), space.n()) <= 256.0) {
        states *= std::pow(space.p(), space.n());
        ++radius;
    }
    return radius;
}

int cmd_verify(Run& run) {
    const auto& land = run.landscape;
    const SpaceParams& space = land.space();
    const Cache cache = run.cfg.verify.spectral_fault
                            ? run.cache.perturbed(run.cfg.verify.spectral_fault->k, run.cfg.verify.spectral_fault->delta)
                            : run.cache;
    Checks checks;

    {
        double worst = 0.0;
        for (int k = -3; k <= 3; ++k) {
            const int lo = -200;
            double oracle = land.interior_mass(lo);
            for (int j = lo; j <= land.window_hi() + 5; ++j) {
                oracle += land.value(j) * character_sphere_integral(space, NormExponent(k), j);
            }
            worst = std::max(worst, std::abs(cache.value(k) - oracle));
        }
        checks.add("spectral_quadrature", worst <= 1e-10, worst, 1e-10, {{"k_range", {-3, 3}}});
    }
    {
        double worst = 0.0;
        for (int k = cache.k_min(); k <= cache.k_max(); ++k) {
            worst = std::max({worst, std::abs(cache.value(k)) - 1.0, -cache.one_minus(k)});
        }
        checks.add("spectral_range", worst <= 0.0, worst, 0.0);
    }
    {
        double worst = 0.0;
        for (double t : {0.1, 0.5, 1.0, 5.0, 20.0}) worst = std::max(worst, mass_audit(cache, t).defect);
        checks.add("conservation", worst < 1e-8, worst, 1e-8);
    }
    {
        double worst = 0.0;
        for (NormExponent i : {NormExponent::inside_unit_ball(), NormExponent(1), NormExponent(2), NormExponent(3), NormExponent(5)}) {
            for (double t : {0.1, 0.5, 2.0, 8.0}) {
                worst = std::max(worst, std::abs(du_dt(cache, i, t) - (convolve_with_kernel(cache, i, t) - u_profile(cache, i, t))));
            }
        }
        checks.add("pde_residual", worst <= 1e-6, worst, 1e-6, {{"points", 20}});
    }
    {
        double worst = 0.0;
        for (NormExponent i : {NormExponent::inside_unit_ball(), NormExponent(1), NormExponent(2)}) {
            for (double t : {0.5, 1.0, 2.0}) {
                const double fd = central_difference([&](double s) { return u_profile(cache, i, s); }, t);
                worst = std::max(worst, std::abs(du_dt(cache, i, t) - fd));
            }
        }
        checks.add("du_dt_finite_difference", worst <= 1e-6, worst, 1e-6);
    }
    {
        const int radius = chain_radius(space);
        const CosetChain chain(space, radius);
        const std::size_t size = chain.size();
        double worst = 0.0;
        for (auto [t, s] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}}) {
            const auto pt = transition_matrix(cache, chain, t);
            const auto ps = transition_matrix(cache, chain, s);
            const auto pts = transition_matrix(cache, chain, t + s);
            for (std::size_t a = 0; a < size; ++a) {
                for (std::size_t b = 0; b < size; ++b) {
                    double sum = 0.0;
                    for (std::size_t c = 0; c < size; ++c) sum += pt[a * size + c] * ps[c * size + b];
                    worst = std::max(worst, std::abs(pts[a * size + b] - sum));
                }
            }
        }
        checks.add("chapman_kolmogorov", worst <= 1e-6, worst, 1e-6, {{"chain_radius_exp", radius}, {"states", size}});
    }
    {
        const double c = exit_rate(cache);
        double worst = 0.0;
        for (double t : {0.5, 1.0, 2.0}) {
            const double fd = central_difference([&](double s) { return survival(cache, s); }, t);
            worst = std::max(worst, std::abs(fd - (g_of_t(cache, t) - c * survival(cache, t))));
        }
        checks.add("survival_ode", worst <= 1e-6, worst, 1e-6);
    }

    const JumpTable table = jump_table_for(run.cfg, land);
    const std::uint64_t paths = run.cfg.verify.paths;
    {
        const MonteCarloResult mc = run_monte_carlo(sim_config(run.cfg, 2.0, paths), table, {0.5, 1.0, 2.0});
        double worst = 0.0;
        json rows = json::array();
        for (const ProportionEstimate& e : estimate_survival(mc)) {
            const double analytic = survival(cache, e.t);
            const double z = e.std_error > 0.0 ? std::abs(e.estimate - analytic) / e.std_error : INFINITY;
            worst = std::max(worst, z);
            rows.push_back({{"t", e.t}, {"estimate", e.estimate}, {"stderr", e.std_error}, {"analytic", analytic}});
        }
        checks.add("monte_carlo_survival", worst <= 3.0, worst, 3.0, {{"paths", paths}, {"rows", rows}});
    }
    {
        StreamRng rng(run.cfg.sim.seed, ~std::uint64_t{0});
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(table.j_max() - table.j_min() + 1), 0);
        for (std::uint64_t k = 0; k < paths; ++k) counts[static_cast<std::size_t>(table.sample(rng) - table.j_min())]++;
        double stat = 0.0, pooled_e = 0.0, pooled_o = 0.0;
        int bins = 0;
        for (int j = table.j_min(); j <= table.j_max(); ++j) {
            const double e = table.probability(j) * static_cast<double>(paths);
            const auto o = static_cast<double>(counts[static_cast<std::size_t>(j - table.j_min())]);
            if (e < 5.0) {
                pooled_e += e;
                pooled_o += o;
                continue;
            }
            stat += (o - e) * (o - e) / e;
            ++bins;
        }
        if (pooled_e > 0.0) {
            stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
            ++bins;
        }
        const int dof = std::max(1, bins - 1);
        const double critical = boost::math::quantile(boost::math::chi_squared(dof), 0.99);
        checks.add("jump_law_chi_square", stat < critical, stat, critical, {{"draws", paths}, {"dof", dof}});
    }

    const auto& fc = run.cfg.fpt;
    const VolterraGrid grid = solve_first_passage(cache, fc.h, fc.T);
    {
        const double residual = volterra_residual(grid);
        checks.add("volterra_residual", residual <= 10 * fc.h * fc.h, residual, 10 * fc.h * fc.h);
    }
    {
        const double h = 0.01;
        const double horizon = 50.0;
        const auto g = sample_g(cache, h, horizon);
        const double c = exit_rate(cache);
        double worst_excess = -INFINITY;
        json rows = json::array();
        for (double s : {0.5, 1.0, 2.0}) {
            double quad = 0.0;
            for (std::size_t m = 1; m < g.size(); ++m) {
                const double t0 = h * static_cast<double>(m - 1);
                const double t1 = h * static_cast<double>(m);
                quad += 0.5 * h * (std::exp(-s * t0) * g[m - 1] + std::exp(-s * t1) * g[m]);
            }
            const double series = laplace_G(cache, s).value;
            const double tol = 1e-4 + c * std::exp(-s * horizon) / s;
            worst_excess = std::max(worst_excess, std::abs(series - quad) - tol);
            rows.push_back({{"s", s}, {"series", series}, {"quadrature", quad}, {"tolerance", tol}});
        }
        checks.add("laplace_consistency", worst_excess <= 0.0, worst_excess, 0.0, {{"rows", rows}});
    }
    {
        const MonteCarloResult mc = run_monte_carlo(sim_config(run.cfg, fc.T, paths), table, {fc.T});
        const ProportionEstimate e = estimate_return_by(mc, fc.T);
        const double analytic = return_probability(grid);
        const double tol = 3.0 * e.std_error + 10.0 * fc.h * fc.h;
        checks.add("first_passage_triangle", std::abs(e.estimate - analytic) <= tol, std::abs(e.estimate - analytic), tol,
                   {{"monte_carlo", e.estimate}, {"stderr", e.std_error}, {"integral_of_f", analytic}, {"T", fc.T}});
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    report["passed"] = checks.failed.empty();
    report["failed"] = checks.failed;
    report["fault_injected"] = run.cfg.verify.spectral_fault.has_value();
    report["checks"] = checks.list;
    write_json(run.path("verify_report.json"), report);

    for (const std::string& name : checks.failed) std::cerr << "verify: check failed: " << name << '\n';
    return checks.failed.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ultrametric diffusion on Q_p^n with exponential landscapes"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Options opts;
    std::uint64_t seed = 0;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"landscape", "spectral table and landscape diagnostics"},
        {"kernel", "heat-kernel profiles, survival and decay bounds"},
        {"simulate", "Monte Carlo first-passage and survival"},
        {"fpt", "Volterra first-passage density and Laplace ladder"},
        {"verify", "cross-module invariant checks; nonzero exit on failure"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "JSON config file (defaults apply when omitted)");
        sub->add_option("--out", opts.out, std::string("output directory (default: $") + kOutEnv + "/<command>)");
        sub->add_option("--seed", seed, "overrides sim.seed");
        subs.push_back(sub);
    }
    CLI11_PARSE(app, argc, argv);

    CLI::App* chosen = app.get_subcommands().front();
    if (chosen->count("--seed") > 0) opts.seed = seed;
    const std::string command = chosen->get_name();

    try {
        RunConfig cfg = opts.config.empty() ? parse_config(json::object()) : load_config(opts.config);
        if (opts.seed) cfg.sim.seed = *opts.seed;
        const ExponentialLandscape landscape = make_landscape(cfg);
        const fs::path dir = output_dir(opts, cfg, command);
        fs::create_directories(dir);
        Run run(command, cfg, dir, landscape);

        int status = 0;
        if (command == "landscape") cmd_landscape(run);
        else if (command == "kernel") cmd_kernel(run);
        else if (command == "simulate") cmd_simulate(run);
        else if (command == "fpt") cmd_fpt(run);
        else status = cmd_verify(run);
        finish(run);
        return status;
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const GammaOutOfRange& e) {
        std::cerr << "config error: landscape.gamma: " << e.what() << '\n';
        return 2;
    } catch (const NonPositiveRate& e) {
        std::cerr << "config error: landscape.c1: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
