#include "kinetic/cli.hpp"

#include "kinetic/boltzmann.hpp"
#include "kinetic/dynamics.hpp"
#include "kinetic/gradlimit.hpp"
#include "kinetic/liouville.hpp"
#include "kinetic/random.hpp"
#include "kinetic/scattering.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <omp.h>
#include <openssl/opensslv.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace kinetic::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct Check {
    std::string name;
    double value;
    double limit;
    std::string relation; // "<", "<=", ">"
    bool pass;
};

Check below(std::string name, double value, double limit)
{
    return {std::move(name), value, limit, "<", value < limit};
}

Check at_most(std::string name, double value, double limit)
{
    return {std::move(name), value, limit, "<=", value <= limit};
}

class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::function<void(std::ostream&)>& body)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out)
            throw RuntimeFailure("cli", fmt::format("cannot write {}", (dir_ / name).string()));
        body(out);
        if (!out)
            throw RuntimeFailure("cli", fmt::format("write failed for {}", (dir_ / name).string()));
        files_.push_back(name);
    }
    void json(const std::string& name, const ordered_json& j)
    {
        write(name, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
    }

    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

// Runs `f`, turning library errors into failures tagged with the stage.
template <class F>
auto stage(const char* module, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const RuntimeFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw RuntimeFailure(module, e.what());
    }
}

InteractionPotential power_law(const PowerLawSpec& s)
{
    return InteractionPotential::power_law(s.coefficient, s.exponent, s.scale);
}

MomentumMixture mixture(const MixtureSpec& s, double mass)
{
    return s.kind == "maxwell" ? MomentumMixture::maxwell(mass, s.temperature)
                               : MomentumMixture::bimodal(mass, s.temperature, s.delta);
}

// sqrt(<|p|^2> / 3)
double rms_momentum(const MomentumMixture& m)
{
    double s = 0.0;
    for (const auto& c : m.components)
        s += c.weight * (3.0 * m.mass * c.temperature + norm2(c.mean));
    return std::sqrt(s / 3.0);
}

ordered_json check_json(const std::vector<Check>& checks)
{
    ordered_json a = ordered_json::array();
    for (const auto& c : checks)
        a.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"limit", c.limit},
                     {"pass", c.pass}});
    return a;
}

std::vector<Check> md_reversal(const MdReversalConfig& c, std::uint64_t seed, Artifacts& out, ordered_json& summary)
{
    const auto mode = c.soft_walls ? BoundaryMode::Confining : BoundaryMode::HardWall;
    InitialDatum f0;
    f0.domain = SpatialDomain::cube(c.dimension, c.length, mode);
    f0.momentum = MomentumMixture::maxwell(c.mass, c.temperature);
    MdSystem sys;
    sys.domain = f0.domain;
    sys.potential = power_law(c.potential);
    sys.walls = c.soft_walls ? ConfiningPotential::soft_walls(f0.domain, c.wall_stiffness) : ConfiningPotential::none();
    sys.cutoff = c.cutoff;

    const ParticleEnsemble ens = stage("sampling", [&] {
        auto rng = make_stream(seed, 0x6d64ULL, 0);
        return sample_ensemble(f0, c.particles, c.potential.scale, c.mass, rng);
    });
    const double reversal = stage("dynamics", [&] {
        Integrator it(ens, sys);
        it.advance(c.dt, c.steps);
        it.reverse();
        it.advance(c.dt, c.steps);
        it.reverse();
        return phase_space_distance(it.state(), ens);
    });
    const TrajectoryTrace trace =
        stage("dynamics", [&] { return integrate(ens, sys, {c.dt, c.energy_steps, c.sample_every, false}); });
    out.write("trace.csv", [&](std::ostream& o) { trace.write_csv(o); });
    double drift = 0.0;
    const double e0 = trace.energy.front();
    for (double e : trace.energy)
        drift = std::max(drift, std::fabs(e - e0) / std::fabs(e0));

    summary["particles"] = c.particles;
    summary["initial_energy"] = e0;
    summary["reversal_error"] = reversal;
    summary["energy_drift"] = drift;
    return {below("reversal_error", reversal, c.max_reversal_error),
            below("energy_drift", drift, c.max_energy_drift)};
}

std::vector<Check> liouville_box(const LiouvilleBoxConfig& c, std::uint64_t seed, Artifacts& out,
                                 ordered_json& summary)
{
    const PhaseBoundary boundary = c.boundary == "open"        ? PhaseBoundary::Open
                                   : c.boundary == "soft-wall" ? PhaseBoundary::Confining
                                                               : PhaseBoundary::HardWall;
    const ConfiningPotential walls =
        boundary == PhaseBoundary::Confining
            ? ConfiningPotential::soft_walls(SpatialDomain::cube(1, c.length, BoundaryMode::Confining), c.wall_stiffness)
            : ConfiningPotential::none();
    const GaussianDensity q0{c.q_mean, c.q_sigma}, p0{c.p_mean, c.p_rms};
    const PhaseGrid grid{c.length, c.nq, c.p_cap, c.np};
    const double t_final = c.crossings * c.length * c.mass / c.p_rms;

    const DelocalizationSeries series = stage("liouville", [&] {
        auto rho0 = PhaseDensity::from_function(grid, [&](double q, double p) { return q0(q) * p0(p); }, boundary);
        return delocalization_experiment(rho0, walls, c.mass, t_final, {c.steps, c.require_localized});
    });
    const auto sigma = position_marginal(series.final_state);
    out.write("distance.csv", [&](std::ostream& o) {
        o << "t,distance\n";
        for (std::size_t k = 0; k < series.times.size(); ++k)
            o << fmt::format("{:.17g},{:.17g}\n", series.times[k], series.distance[k]);
    });
    out.write("marginal.csv", [&](std::ostream& o) { write_marginal_csv(o, sigma, c.length); });

    std::vector<Check> checks{below("final_distance", series.distance.back(), c.max_distance)};
    summary["t_final"] = t_final;
    summary["initial_distance"] = series.distance.front();
    summary["final_distance"] = series.distance.back();
    summary["max_raw_mass_drift"] = series.max_raw_mass_drift;

    if (c.oracle_samples > 0) {
        const auto mc = stage("liouville", [&] {
            return characteristics_marginal(q0, p0, c.length, c.mass, t_final, boundary, c.oracle_samples,
                                            c.oracle_bins, seed);
        });
        const auto coarse = coarsen(sigma, c.oracle_bins, c.length / static_cast<double>(c.nq));
        double gap = 0.0, d_mc = 0.0, d_grid = 0.0;
        const double u = 1.0 / static_cast<double>(c.oracle_bins);
        for (std::size_t b = 0; b < c.oracle_bins; ++b) {
            gap += 0.5 * std::fabs(coarse[b] - mc[b]);
            d_mc += 0.5 * std::fabs(mc[b] - u);
            d_grid += 0.5 * std::fabs(coarse[b] - u);
        }
        out.write("oracle.csv", [&](std::ostream& o) {
            o << "bin,q,grid,oracle\n";
            for (std::size_t b = 0; b < c.oracle_bins; ++b)
                o << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", b, (static_cast<double>(b) + 0.5) * u * c.length,
                                 coarse[b], mc[b]);
        });
        summary["oracle"] = {{"samples", c.oracle_samples},
                             {"bins", c.oracle_bins},
                             {"grid_distance", d_grid},
                             {"oracle_distance", d_mc},
                             {"marginal_gap", gap}};
        checks.push_back(below("oracle_marginal_gap", gap, c.max_oracle_gap));
        checks.push_back(below("oracle_distance_gap", std::fabs(d_grid - d_mc), c.max_oracle_gap));
    }
    return checks;
}

std::vector<Check> scattering_table(const ScatteringTableConfig& c, Artifacts& out, ordered_json& summary)
{
    const InteractionPotential pot = c.kind == "hard-sphere"
                                         ? InteractionPotential::hard_sphere(c.diameter, c.potential.scale)
                                         : power_law(c.potential);
    double err = 0.0;
    const ScatteringKernel table = stage("scattering", [&] {
        return build_kernel_table(pot, c.mass, KernelGrid::standard(c.g_min, c.g_max, c.b_nodes, c.g_nodes),
                                  c.chi_min, c.validation_samples, &err);
    });
    out.write("kernel.csv", [&](std::ostream& o) { table.write_csv(o); });
    ordered_json bm = ordered_json::array();
    for (std::size_t j = 0; j < table.g_grid().size(); ++j)
        bm.push_back({{"g", table.g_grid()[j]}, {"b_max", table.b_max_grid()[j]}});
    summary["b_max"] = bm;
    summary["midpoint_error"] = err;
    if (c.validation_samples == 0)
        return {};
    return {below("midpoint_error", err, c.max_midpoint_error)};
}

std::vector<Check> boltzmann_relax(const BoltzmannRelaxConfig& c, std::uint64_t seed, Artifacts& out,
                                   ordered_json& summary)
{
    const InteractionPotential pot = power_law(c.potential);
    const MomentumMixture mix = mixture(c.initial, c.mass);
    const double p_rms = rms_momentum(mix);
    auto kernel_for = [&](const VelocityGrid& vg) {
        return stage("scattering", [&] {
            return build_kernel_table(pot, c.mass,
                                      KernelGrid::standard(vg.h() / (4.0 * c.mass),
                                                           2.0 * std::sqrt(3.0) * vg.p_cap / c.mass,
                                                           c.kernel_b_nodes, c.kernel_g_nodes),
                                      c.chi_min);
        });
    };
    const VelocityGrid vg{c.n, c.p_cap_over_rms * p_rms};
    const ScatteringKernel kernel = kernel_for(vg);
    const auto f0 = stage("boltzmann", [&] {
        return VelocityDistribution::from_function(vg, [&](const Vec3& p) { return mix.density(p); });
    });

    HomogeneousConfig cfg;
    cfg.collision.density = c.density;
    cfg.collision.mass = c.mass;
    cfg.collision.samples = c.samples;
    cfg.collision.seed = seed;
    cfg.collision.interpolation =
        c.interpolation == "trilinear" ? OffGridInterpolation::Trilinear : OffGridInterpolation::CubicMaxwellRatio;
    cfg.dt = c.dt;
    cfg.scheme = c.scheme == "midpoint" ? TimeScheme::Midpoint : TimeScheme::ForwardEuler;
    cfg.skip_below = c.skip_below;

    const HTrace trace = stage("boltzmann", [&] { return relax_to_equilibrium(f0, kernel, cfg, c.t_final); });
    out.write("h_trace.csv", [&](std::ostream& o) { trace.write_csv(o); });
    out.write("final.csv", [&](std::ostream& o) { trace.final_state.write_csv(o); });
    const SlopeFit fit = h_slope(trace, c.h_confidence);
    double stability = 0.0;
    for (const auto& l : trace.logs)
        stability = std::max(stability, l.stability_ratio);
    summary["p_cap"] = vg.p_cap;
    summary["h_slope"] = {{"slope", fit.slope}, {"std_error", fit.std_error}, {"upper_bound", fit.upper_bound}};
    summary["initial_l1_to_maxwell"] = trace.l1_to_maxwell.front();
    summary["terminal_l1_to_maxwell"] = trace.l1_to_maxwell.back();
    summary["relaxation_time"] = std::isfinite(relaxation_time(trace)) ? relaxation_time(trace) : -1.0;
    summary["max_stability_ratio"] = stability;
    std::vector<Check> checks{at_most("h_slope_upper_bound", fit.upper_bound, 0.0),
                              below("terminal_l1_to_maxwell", trace.l1_to_maxwell.back(), c.max_terminal_l1)};

    if (c.maxwell_steps > 0) {
        const auto M = stage("boltzmann", [&] { return matched_maxwellian(f0, c.mass); });
        HomogeneousConfig mc = cfg;
        mc.dt = c.maxwell_dt;
        mc.collision.seed = splitmix64(seed ^ 0x4d61ULL);
        const HTrace tm = stage("boltzmann", [&] {
            return relax_to_equilibrium(M, kernel, mc, c.maxwell_dt * static_cast<double>(c.maxwell_steps));
        });
        const double drift = l1_distance(tm.final_state, M);
        const double bound = tm.accumulated_noise();
        summary["maxwell_check"] = {{"l1_drift", drift}, {"noise_bound", bound}};
        checks.push_back(at_most("maxwell_drift_over_noise", bound > 0.0 ? drift / bound : (drift > 0.0 ? 1e300 : 0.0),
                                 c.maxwell_factor));
    }

    if (c.dsmc_particles > 0) {
        const VelocityDistribution hist = stage("dsmc", [&] {
            auto rng = make_stream(seed, 0x6473ULL, 0);
            std::vector<Vec3> ps(c.dsmc_particles);
            for (auto& p : ps)
                p = mix.sample(rng);
            DsmcGas gas(std::move(ps), kernel,
                        {c.dsmc_particles, c.density, c.mass, c.dsmc_dt, splitmix64(seed ^ 0x6473ULL)});
            gas.advance(c.t_final);
            return gas.histogram(vg);
        });
        const auto avg = cell_averages(trace.final_state);
        const double l1 = l1_distance(avg, hist);
        out.write("dsmc.csv", [&](std::ostream& o) { hist.write_csv(o); });
        summary["dsmc"] = {{"particles", c.dsmc_particles}, {"l1", l1}, {"marginal_l1", marginal_l1(avg, hist)}};
        checks.push_back(below("dsmc_l1", l1, c.max_dsmc_l1));
    }

    if (c.conservation_n > 0) {
        const VelocityGrid cg{c.conservation_n, c.p_cap_over_rms * p_rms};
        const ScatteringKernel ck = kernel_for(cg);
        const auto rep = stage("boltzmann", [&] {
            const auto fc = VelocityDistribution::from_function(cg, [&](const Vec3& p) { return mix.density(p); });
            QuadratureConfig qc;
            qc.density = c.density;
            qc.mass = c.mass;
            const auto rate = collision_quadrature(fc, ck, qc, QuadratureScheme::ConservativeProjection);
            return conservation_errors(fc, rate, loss_rates(fc, ck, qc), c.mass);
        });
        summary["conservation"] = {{"n", c.conservation_n},
                                   {"mass", rep.mass},
                                   {"momentum", {rep.momentum.x, rep.momentum.y, rep.momentum.z}},
                                   {"energy", rep.energy}};
        checks.push_back(below("conservation_worst", rep.worst(), c.max_conservation));
    }
    return checks;
}

void write_trend(Artifacts& out, const std::string& name, const SweepReport& rep)
{
    out.write(name, [&](std::ostream& o) {
        o << "rung,N,mu,t,D,sd,floor,excess,excess_low,excess_high,factorization,factorization_low,"
             "factorization_high\n";
        for (std::size_t k = 0; k < rep.rungs.size(); ++k) {
            const auto& r = rep.rungs[k];
            for (const auto& c : r.checkpoints)
                o << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                                 "{:.17g},{:.17g}\n",
                                 k, r.rung.particles, r.rung.mu, c.t, c.raw, c.sd, c.floor, c.excess, c.excess_low,
                                 c.excess_high, c.factorization.value, c.factorization.ci_low,
                                 c.factorization.ci_high);
        }
    });
}

ordered_json trend_json(const TrendTest& t)
{
    return {{"decreasing", t.decreasing}, {"z", t.z}, {"p_value", t.p_value}};
}

std::vector<Check> grad_sweep(const GradSweepConfig& c, std::uint64_t seed, Artifacts& out, ordered_json& summary)
{
    const InteractionPotential pot = power_law(c.potential);
    const MomentumMixture mix = mixture(c.momentum, c.mass);
    const double v = std::sqrt(c.momentum.temperature / c.mass);
    const ScatteringKernel kernel = stage("scattering", [&] {
        return build_kernel_table(pot, c.mass, KernelGrid::standard(0.02 * v, 40.0 * v, 128, 64));
    });
    const ScalingConfig scaling = stage("gradlimit", [&] {
        auto s = ScalingConfig::geometric(c.n0, c.mu0, c.rungs, c.runs);
        s.validate();
        return s;
    });
    const double side = c.length ? *c.length
                                 : stage("gradlimit", [&] {
                                       return cube_side_for_mean_free_path(kernel, mix, scaling.kappa,
                                                                           c.mu0 / c.mu_over_mean_free_path);
                                   });
    InitialDatum f0;
    f0.domain = SpatialDomain::cube(3, side);
    f0.momentum = mix;

    SweepOptions opt;
    opt.checkpoints = c.checkpoints;
    opt.dtau = c.dtau;
    opt.cutoff = c.cutoff;
    opt.bins.domain = f0.domain;
    opt.bins.q_bins = c.q_bins;
    opt.bins.p_bins = c.p_bins;
    opt.bins.p_cap = c.p_cap;
    opt.factorization.bins_per_axis = c.factorization_bins;
    opt.factorization.momentum_only = c.factorization_momentum_only;
    opt.factorization.p_cap = c.p_cap;
    opt.factorization.bootstrap = c.bootstrap;
    opt.factorization.confidence = c.confidence;
    opt.factorization.seed = seed;
    opt.reference_particles = c.reference_particles;
    opt.reference_dt = c.reference_dt;
    opt.bootstrap = c.bootstrap;
    opt.floor_replicates = c.floor_replicates;
    opt.confidence = c.confidence;
    opt.seed = seed;
    opt.reversal = c.reversal;

    const SweepReport rep = stage("gradlimit", [&] { return scaling_sweep(scaling, f0, pot, kernel, opt); });
    out.write("sweep.json", [&](std::ostream& o) { rep.write_json(o); });
    write_trend(out, "trend.csv", rep);
    for (std::size_t k = 0; k < rep.rungs.size(); ++k)
        out.write(fmt::format("f1_rung{}.csv", k), [&](std::ostream& o) { rep.rungs[k].histograms.back().write_csv(o); });

    summary["box_side"] = side;
    summary["mean_free_time"] = rep.mean_free_time;
    summary["trend"] = trend_json(rep.trend);
    summary["excess_trend"] = trend_json(rep.excess_trend);
    std::vector<Check> checks{{"d_trend_decreasing", rep.trend.decreasing ? 1.0 : 0.0, 1.0, "==", rep.trend.decreasing}};

    if (c.control) {
        opt.collisionless = true;
        opt.reversal = false;
        const SweepReport ctl = stage("gradlimit", [&] { return scaling_sweep(scaling, f0, pot, kernel, opt); });
        out.write("control.json", [&](std::ostream& o) { ctl.write_json(o); });
        write_trend(out, "control_trend.csv", ctl);
        // Flat at the noise floor: every excess interval covers zero.
        double worst = 0.0;
        std::size_t outside = 0;
        for (const auto& r : ctl.rungs)
            for (const auto& cp : r.checkpoints) {
                if (cp.excess_low > 0.0 || cp.excess_high < 0.0)
                    ++outside;
                worst = std::max(worst, std::fabs(cp.excess));
            }
        summary["control"] = {{"trend", trend_json(ctl.trend)},
                              {"excess_trend", trend_json(ctl.excess_trend)},
                              {"largest_excess", worst},
                              {"intervals_excluding_zero", outside}};
        checks.push_back({"control_excess_intervals_excluding_zero", static_cast<double>(outside), 0.0, "==",
                          outside == 0});
    }
    return checks;
}

std::string compiler_version()
{
#if defined(__clang__)
    return fmt::format("clang {}.{}.{}", __clang_major__, __clang_minor__, __clang_patchlevel__);
#elif defined(__GNUC__)
    return fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#else
    return "unknown";
#endif
}

ordered_json versions()
{
    return {{"kinetic", kVersion},
            {"compiler", compiler_version()},
            {"fmt", FMT_VERSION},
            {"boost", BOOST_LIB_VERSION},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"openmp", _OPENMP},
            {"openssl", OPENSSL_VERSION_TEXT}};
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

fs::path output_directory(const ExperimentConfig& cfg, const RunOptions& opt)
{
    if (opt.out)
        return *opt.out;
    if (cfg.output_dir)
        return *cfg.output_dir;
    const char* env = std::getenv("KINETIC_OUTPUT_DIR");
    const fs::path base = env && *env ? fs::path(env) : fs::path("runs");
    const std::string stem = opt.config_path.empty() ? cfg.kind : opt.config_path.stem().string();
    return base / stem;
}

RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opt)
{
    RunOutcome outcome;
    outcome.directory = output_directory(cfg, opt);
    std::error_code ec;
    fs::create_directories(outcome.directory, ec);
    if (ec)
        throw RuntimeFailure("cli", fmt::format("cannot create {}: {}", outcome.directory.string(), ec.message()));
    if (opt.threads > 0)
        omp_set_num_threads(opt.threads);
    const std::uint64_t seed = opt.seed ? *opt.seed : cfg.seed;

    Artifacts out(outcome.directory);
    ordered_json summary;
    summary["experiment"] = cfg.kind;
    summary["seed"] = seed;
    std::vector<Check> checks;
    std::string error, module;
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, MdReversalConfig>)
                    checks = md_reversal(p, seed, out, summary);
                else if constexpr (std::is_same_v<T, LiouvilleBoxConfig>)
                    checks = liouville_box(p, seed, out, summary);
                else if constexpr (std::is_same_v<T, ScatteringTableConfig>)
                    checks = scattering_table(p, out, summary);
                else if constexpr (std::is_same_v<T, BoltzmannRelaxConfig>)
                    checks = boltzmann_relax(p, seed, out, summary);
                else
                    checks = grad_sweep(p, seed, out, summary);
            },
            cfg.params);
        summary["checks"] = check_json(checks);
        out.json("summary.json", summary);
    } catch (const RuntimeFailure& e) {
        error = e.what();
        module = e.module();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    ordered_json m;
    m["experiment"] = cfg.kind;
    m["status"] = error.empty() ? "complete" : "failed";
    m["partial"] = !error.empty();
    if (!error.empty())
        m["error"] = {{"module", module}, {"message", error}};
    m["config_file"] = opt.config_path.string();
    m["config_sha256"] = sha256_hex(cfg.text);
    m["seed"] = seed;
    m["seed_source"] = opt.seed ? "--seed" : "config";
    m["threads"] = omp_get_max_threads();
    m["started_utc"] = started;
    m["wall_time_s"] = wall;
    m["versions"] = versions();
    m["checks"] = check_json(checks);
    ordered_json files = ordered_json::array();
    for (const auto& f : out.files())
        files.push_back({{"path", f},
                         {"sha256", sha256_file(outcome.directory / f)},
                         {"bytes", static_cast<std::uint64_t>(fs::file_size(outcome.directory / f))}});
    m["files"] = files;
    {
        std::ofstream mf(outcome.directory / "manifest.json", std::ios::binary);
        mf << m.dump(2) << "\n";
    }

    outcome.files = out.files();
    if (!error.empty()) {
        outcome.exit_code = Runtime;
        outcome.failed_checks.push_back(error);
        return outcome;
    }
    for (const auto& c : checks)
        if (!c.pass)
            outcome.failed_checks.push_back(fmt::format("{} = {:.6g} (needs {} {:.6g})", c.name, c.value, c.relation,
                                                        c.limit));
    outcome.exit_code = outcome.failed_checks.empty() ? Success : Threshold;
    return outcome;
}

} // namespace kinetic::cli
