#include "kinetic/gradlimit.hpp"

#include "kinetic/random.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

namespace kinetic {

double mean_free_time(const ScatteringKernel& kernel, double density, double mean_speed, double mass)
{
    if (!(density > 0.0) || !(mean_speed > 0.0) || !(mass > 0.0))
        throw DomainError("mean free time needs n > 0, u > 0 and m > 0");
    (void)mass;
    const double bm = kernel.b_max(mean_speed);
    return 1.0 / (density * std::numbers::pi * bm * bm * mean_speed);
}

double cube_side_for_mean_free_path(const ScatteringKernel& kernel, const MomentumMixture& momentum, double kappa,
                                    double mean_free_path)
{
    momentum.validate();
    if (!(kappa > 0.0) || !(mean_free_path > 0.0))
        throw DomainError("cube side needs kappa > 0 and a positive mean free path");
    const double b = kernel.b_max(momentum.mean_speed());
    return std::cbrt(kappa * std::numbers::pi * b * b * mean_free_path);
}

TrendTest trend_test(const std::vector<double>& values, const std::vector<double>& sds, double confidence)
{
    if (values.size() != sds.size() || values.size() < 2)
        throw InputError("trend test needs matching values and deviations for at least two rungs");
    TrendTest t;
    t.decreasing = true;
    const boost::math::normal normal;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double s = std::sqrt(sds[k] * sds[k] + sds[k + 1] * sds[k + 1]);
        const double diff = values[k] - values[k + 1];
        const double z = s > 0.0 ? diff / s : (diff > 0.0 ? INFINITY : -INFINITY);
        const double p = std::isfinite(z) ? boost::math::cdf(boost::math::complement(normal, z)) : (z > 0 ? 0.0 : 1.0);
        t.z.push_back(z);
        t.p_value.push_back(p);
        if (!(p < 1.0 - confidence))
            t.decreasing = false;
    }
    return t;
}

namespace {

struct RunRecord {
    std::vector<std::vector<std::uint64_t>> counts; // per checkpoint, cells + outside
    std::vector<ParticleEnsemble> snapshots;        // per checkpoint, momenta in unscaled units
    std::vector<std::uint64_t> back_counts;         // after the round trip
    double drift = 0.0;
    double interaction_ratio = 0.0;
    SamplingStats sampling;
};

std::vector<std::uint64_t> count_cells(const ParticleEnsemble& ens, const PhaseBins& bins)
{
    std::vector<std::uint64_t> c(bins.size() + 1, 0);
    for (std::size_t i = 0; i < ens.size(); ++i)
        ++c[bins.cell(ens.positions[i], ens.momenta[i])];
    return c;
}

std::vector<double> to_probabilities(const std::vector<std::uint64_t>& c)
{
    double n = 0.0;
    for (auto v : c)
        n += static_cast<double>(v);
    std::vector<double> p(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        p[k] = static_cast<double>(c[k]) / n;
    return p;
}

ParticleEnsemble unscaled(const ParticleEnsemble& ens, double factor)
{
    if (factor == 1.0)
        return ens;
    ParticleEnsemble out = ens;
    out.mass /= factor;
    for (auto& p : out.momenta)
        p = p / factor;
    return out;
}

} // namespace

SweepReport scaling_sweep(const ScalingConfig& cfg, const InitialDatum& f0, const InteractionPotential& pot,
                          const ScatteringKernel& kernel, const SweepOptions& opt)
{
    cfg.validate();
    f0.validate();
    pot.validate();
    if (f0.domain.dimension != 3 || f0.domain.boundary != BoundaryMode::HardWall || !f0.spatial.empty())
        throw DomainError("scaling sweep needs a uniform datum in a 3-D hard-wall box");
    if (opt.checkpoints.empty() || !(opt.dtau > 0.0) || !(opt.cutoff > 0.0) || !(opt.reference_dt > 0.0))
        throw DomainError("scaling sweep needs checkpoints, dtau > 0, cutoff > 0 and reference_dt > 0");
    for (std::size_t c = 0; c < opt.checkpoints.size(); ++c)
        if (!(opt.checkpoints[c] >= 0.0) || (c > 0 && !(opt.checkpoints[c] > opt.checkpoints[c - 1])))
            throw DomainError("checkpoints must be non-negative and increasing");
    PhaseBins bins = opt.bins;
    bins.domain = f0.domain;
    bins.validate();

    const double m = f0.momentum.mass;
    SweepReport rep;
    rep.kappa = cfg.kappa;
    rep.volume = f0.domain.volume();
    rep.density = cfg.kappa / rep.volume;
    rep.mean_speed = f0.momentum.mean_speed();
    rep.mean_free_time = mean_free_time(kernel, rep.density, rep.mean_speed, m);
    rep.collisionless = opt.collisionless;
    for (double c : opt.checkpoints)
        rep.times.push_back(c * rep.mean_free_time);

    // Reference: the datum itself at t = 0 and for free transport, DSMC of
    // the homogeneous equation otherwise.
    const std::vector<double> exact = reference_probabilities(bins, f0);
    std::vector<std::uint64_t> ref_samples(rep.times.size(), 0);
    if (opt.collisionless) {
        rep.reference.assign(rep.times.size(), exact);
    } else {
        std::vector<Vec3> momenta(opt.reference_particles);
        auto rng = make_stream(opt.seed, 0x72656600ULL, 0);
        for (auto& p : momenta)
            p = f0.momentum.sample(rng);
        DsmcConfig dc;
        dc.particles = opt.reference_particles;
        dc.density = rep.density;
        dc.mass = m;
        dc.dt = opt.reference_dt * rep.mean_free_time;
        dc.seed = splitmix64(opt.seed ^ 0x64736d63ULL);
        DsmcGas gas(std::move(momenta), kernel, dc);
        for (std::size_t c = 0; c < rep.times.size(); ++c) {
            if (rep.times[c] == 0.0) {
                rep.reference.push_back(exact);
                continue;
            }
            gas.advance(rep.times[c] - gas.time());
            rep.reference.push_back(reference_probabilities(bins, gas.momenta()));
            ref_samples[c] = opt.reference_particles;
        }
        rep.reference_samples = opt.reference_particles;
    }

    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + opt.confidence));
    for (std::size_t k = 0; k < cfg.ladder.size(); ++k) {
        const Rung rung = cfg.ladder[k];
        RungResult rr;
        rr.rung = rung;
        rr.runs = cfg.runs;
        InteractionPotential pk = pot;
        pk.scale = rung.mu;
        double mk = m;
        if (cfg.rescale_mass) {
            const RescaledParticle rs = rescale_masses(m, pk, rung.mu);
            mk = rs.mass;
            pk = rs.potential;
        }
        if (opt.collisionless)
            pk = InteractionPotential::none(rung.mu);
        const double factor = mk / m; // momentum scale of the Remark mode
        rr.mass = mk;
        rr.md_dt = opt.dtau * rung.mu;
        MdSystem sys;
        sys.domain = f0.domain;
        sys.potential = pk;
        sys.walls = ConfiningPotential::none();
        sys.cutoff = opt.cutoff;
        sys.validate();
        std::vector<std::size_t> marks;
        for (double t : rep.times)
            marks.push_back(static_cast<std::size_t>(std::llround(t / rr.md_dt)));

        std::vector<RunRecord> records(cfg.runs);
        std::vector<std::exception_ptr> errors(cfg.runs);
        for (std::size_t r = 0; r < cfg.runs; ++r)
            rr.seeds.push_back(splitmix64(opt.seed ^ splitmix64(k ^ splitmix64(r))));
#pragma omp parallel for schedule(dynamic, 1)
        for (long rl = 0; rl < static_cast<long>(cfg.runs); ++rl) {
            const auto r = static_cast<std::size_t>(rl);
            try {
                RunRecord& rec = records[r];
                std::mt19937_64 rng(rr.seeds[r]);
                const ParticleEnsemble start = sample_ensemble(f0, rung.particles, rung.mu, mk, rng, &rec.sampling);
                const double h0 = hamiltonian(start, pk, sys.walls);
                const double ke0 = kinetic_energy(start);
                rec.interaction_ratio = (h0 - ke0) / ke0;
                Integrator it(start, sys);
                std::size_t done = 0;
                for (std::size_t c = 0; c < marks.size(); ++c) {
                    it.advance(rr.md_dt, marks[c] - done);
                    done = marks[c];
                    ParticleEnsemble snap = unscaled(it.state(), factor);
                    rec.counts.push_back(count_cells(snap, bins));
                    rec.snapshots.push_back(std::move(snap));
                }
                const double h1 = hamiltonian(it.state(), pk, sys.walls);
                rec.drift = std::fabs(h1 - h0) / std::fabs(h0);
                if (opt.reversal) {
                    it.reverse();
                    it.advance(rr.md_dt, done);
                    it.reverse();
                    rec.back_counts = count_cells(unscaled(it.state(), factor), bins);
                }
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);

        std::size_t attempts = 0, rejected = 0;
        for (const auto& rec : records) {
            attempts += rec.sampling.attempts;
            rejected += rec.sampling.rejected;
            rr.max_energy_drift = std::max(rr.max_energy_drift, rec.drift);
            rr.initial_interaction_ratio = std::max(rr.initial_interaction_ratio, rec.interaction_ratio);
        }
        rr.rejection_rate = attempts ? static_cast<double>(rejected) / static_cast<double>(attempts) : 0.0;
        const std::uint64_t samples = static_cast<std::uint64_t>(rung.particles) * cfg.runs;

        auto rng = make_stream(opt.seed, 0x626f6f74ULL, k);
        for (std::size_t c = 0; c < marks.size(); ++c) {
            CheckpointResult cr;
            cr.t = rep.times[c];
            std::vector<std::uint64_t> total(bins.size() + 1, 0);
            for (const auto& rec : records)
                for (std::size_t i = 0; i < total.size(); ++i)
                    total[i] += rec.counts[c][i];
            cr.raw = probability_l1(to_probabilities(total), rep.reference[c]);
            const NoiseFloor fl = histogram_noise_floor(rep.reference[c], samples, ref_samples[c],
                                                        opt.floor_replicates, opt.seed ^ (k << 8) ^ c);
            cr.floor = fl.mean;
            cr.floor_sd = fl.sd;
            cr.excess = cr.raw - cr.floor;
            if (cfg.runs >= 2 && opt.bootstrap >= 2) {
                double s = 0.0, s2 = 0.0;
                for (std::size_t b = 0; b < opt.bootstrap; ++b) {
                    std::fill(total.begin(), total.end(), 0);
                    for (std::size_t r = 0; r < cfg.runs; ++r) {
                        const auto pick = static_cast<std::size_t>(u01(rng) * static_cast<double>(cfg.runs));
                        for (std::size_t i = 0; i < total.size(); ++i)
                            total[i] += records[pick].counts[c][i];
                    }
                    const double v = probability_l1(to_probabilities(total), rep.reference[c]);
                    s += v;
                    s2 += v * v;
                }
                const double nb = static_cast<double>(opt.bootstrap);
                cr.sd = std::sqrt(std::max(0.0, (s2 - s * s / nb) / (nb - 1.0)));
            }
            cr.sd = std::max(cr.sd, cr.floor_sd);
            cr.ci_low = cr.raw - z * cr.sd;
            cr.ci_high = cr.raw + z * cr.sd;
            cr.excess_low = cr.excess - z * cr.sd;
            cr.excess_high = cr.excess + z * cr.sd;

            std::vector<ParticleEnsemble> snaps;
            snaps.reserve(records.size());
            for (const auto& rec : records)
                snaps.push_back(rec.snapshots[c]);
            FactorizationConfig fc = opt.factorization;
            fc.seed = opt.seed ^ splitmix64(k * 64 + c);
            cr.factorization = factorization_error(snaps, f0.domain, fc);

            rr.histograms.push_back(empirical_f1(snaps, bins));
            rr.checkpoints.push_back(cr);
        }
        if (opt.reversal) {
            std::vector<std::uint64_t> back(bins.size() + 1, 0);
            for (const auto& rec : records)
                for (std::size_t i = 0; i < back.size(); ++i)
                    back[i] += rec.back_counts[i];
            rr.reversal_l1 = probability_l1(to_probabilities(back), rr.histograms.front().probabilities());
            rr.reversal_floor =
                histogram_noise_floor(rep.reference.front(), samples, samples, opt.floor_replicates, opt.seed ^ 0x7276)
                    .mean;
        }
        for (auto& rec : records)
            rec.snapshots.clear();
        rep.rungs.push_back(std::move(rr));
    }

    if (rep.rungs.size() >= 2) {
        for (std::size_t c = 0; c < rep.times.size(); ++c) {
            std::vector<double> d, e, s;
            for (const auto& rr : rep.rungs) {
                d.push_back(rr.checkpoints[c].raw);
                e.push_back(rr.checkpoints[c].excess);
                s.push_back(rr.checkpoints[c].sd);
            }
            rep.trend_by_checkpoint.push_back(trend_test(d, s, opt.confidence));
            rep.excess_trend_by_checkpoint.push_back(trend_test(e, s, opt.confidence));
        }
        rep.trend = rep.trend_by_checkpoint.back();
        rep.excess_trend = rep.excess_trend_by_checkpoint.back();
    }
    return rep;
}

void SweepReport::write_json(std::ostream& out) const
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["kappa"] = kappa;
    j["volume"] = volume;
    j["density"] = density;
    j["mean_speed"] = mean_speed;
    j["mean_free_time"] = mean_free_time;
    j["collisionless"] = collisionless;
    j["reference_samples"] = reference_samples;
    j["times"] = times;
    auto trend_json = [](const TrendTest& t) {
        ordered_json o;
        o["decreasing"] = t.decreasing;
        o["z"] = t.z;
        o["p_value"] = t.p_value;
        return o;
    };
    j["trend"] = trend_json(trend);
    j["trend_by_checkpoint"] = ordered_json::array();
    for (const auto& t : trend_by_checkpoint)
        j["trend_by_checkpoint"].push_back(trend_json(t));
    j["excess_trend"] = trend_json(excess_trend);
    j["excess_trend_by_checkpoint"] = ordered_json::array();
    for (const auto& t : excess_trend_by_checkpoint)
        j["excess_trend_by_checkpoint"].push_back(trend_json(t));
    j["rungs"] = ordered_json::array();
    for (const auto& r : rungs) {
        ordered_json o;
        o["N"] = r.rung.particles;
        o["mu"] = r.rung.mu;
        o["R"] = r.runs;
        o["mass"] = r.mass;
        o["md_dt"] = r.md_dt;
        o["rejection_rate"] = r.rejection_rate;
        o["max_energy_drift"] = r.max_energy_drift;
        o["initial_interaction_ratio"] = r.initial_interaction_ratio;
        if (r.reversal_l1 >= 0.0) {
            o["reversal_l1"] = r.reversal_l1;
            o["reversal_floor"] = r.reversal_floor;
        }
        o["seeds"] = r.seeds;
        o["checkpoints"] = ordered_json::array();
        o["factorization"] = ordered_json::array();
        for (const auto& c : r.checkpoints) {
            ordered_json cp;
            cp["t"] = c.t;
            cp["D"] = c.raw;
            cp["CI"] = {c.ci_low, c.ci_high};
            cp["sd"] = c.sd;
            cp["floor"] = c.floor;
            cp["floor_sd"] = c.floor_sd;
            cp["excess"] = c.excess;
            cp["excess_CI"] = {c.excess_low, c.excess_high};
            o["checkpoints"].push_back(cp);
            ordered_json fc;
            fc["t"] = c.t;
            fc["value"] = c.factorization.value;
            fc["CI"] = {c.factorization.ci_low, c.factorization.ci_high};
            fc["raw"] = c.factorization.raw;
            fc["baseline"] = c.factorization.baseline;
            fc["pairs"] = c.factorization.pairs;
            o["factorization"].push_back(fc);
        }
        j["rungs"].push_back(o);
    }
    out << j.dump(2) << '\n';
}

} // namespace kinetic
