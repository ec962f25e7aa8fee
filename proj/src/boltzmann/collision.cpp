#include "kinetic/boltzmann.hpp"

#include "kinetic/random.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace kinetic {

NodeSampler::NodeSampler(const VelocityDistribution& f) : cdf_(f.values().size())
{
    double s = 0.0;
    for (std::size_t k = 0; k < cdf_.size(); ++k) {
        s += f[k];
        cdf_[k] = s;
    }
    if (!(s > 0.0))
        throw DomainError("cannot sample partners from a zero distribution");
    for (double& c : cdf_)
        c /= s;
    cdf_.back() = 1.0;
    guide_.resize(cdf_.size());
    std::size_t k = 0;
    for (std::size_t b = 0; b < guide_.size(); ++b) {
        const double edge = static_cast<double>(b) / static_cast<double>(guide_.size());
        while (k + 1 < cdf_.size() && cdf_[k] <= edge)
            ++k;
        guide_[b] = static_cast<std::uint32_t>(k);
    }
}

std::size_t NodeSampler::operator()(double u) const
{
    // Smallest k with cdf[k] > u, started from the guide table.
    std::size_t k = guide_[std::min(guide_.size() - 1, static_cast<std::size_t>(u * static_cast<double>(guide_.size())))];
    while (k + 1 < cdf_.size() && cdf_[k] <= u)
        ++k;
    return k;
}

namespace {

void check_params(const CollisionParams& params)
{
    if (params.samples < 1)
        throw DomainError("collision integral needs at least one sample");
    if (!(params.density >= 0.0) || !(params.mass > 0.0))
        throw DomainError("collision integral needs n >= 0 and m > 0");
}

} // namespace

CollisionContext::CollisionContext(const VelocityDistribution& f, const CollisionParams& params)
    : f_(&f), sampler_(f), field_(f)
{
    if (params.interpolation == OffGridInterpolation::Trilinear)
        return;
    cubic_ = true;
    const VelocityDistribution maxw = matched_maxwellian(f, params.mass);
    weight_ = maxw.values();
    for (std::size_t k = 0; k < weight_.size(); ++k) {
        if (!(weight_[k] > 0.0))
            throw NumericalError("matched Maxwellian underflows on the grid; lower p_cap");
        field_.values()[k] = f[k] / weight_[k];
    }
}

CollisionEstimate collision_integral(const CollisionContext& ctx, std::size_t node, const ScatteringKernel& kernel,
                                     const CollisionParams& params, std::uint64_t stream)
{
    check_params(params);
    const auto& f = ctx.f();
    const auto& field = ctx.field();
    const auto& grid = f.grid();
    if (node >= grid.size())
        throw DomainError("collision integral: node index out of range");
    CollisionEstimate est;
    if (params.density == 0.0)
        return est;

    auto rng = make_stream(params.seed, node, stream);
    const Vec3 p = grid.node(node);
    const double fp = f[node];
    const double wp = ctx.weight(node);
    const double rp = field[node];
    const double m = params.mass;
    const std::size_t s_count = params.samples;

    double sum = 0.0, sum2 = 0.0, loss = 0.0, clipped_loss = 0.0;
    std::size_t clipped = 0;
    for (std::size_t s = 0; s < s_count; ++s) {
        const double u_node = u01(rng);
        const double u_b = u01(rng);
        const double u_phi = u01(rng);
        const std::size_t j = ctx.sampler()(u_node);
        const Vec3 p1 = grid.node(j);
        const Vec3 d = p - p1;
        const double g = norm(d) / m;
        if (!(g > 0.0))
            continue; // zero relative speed: no collisions
        const ScatteringKernel::Lookup row = kernel.lookup(g);
        const double bm = row.b_max;
        const double rate = params.density * g * std::numbers::pi * bm * bm;
        const double chi = kernel.chi(row, bm * std::sqrt(u_b));
        const double phi = 2.0 * std::numbers::pi * u_phi;
        const CollisionFrame fr = collision_frame(d);
        const CollisionOutcome out = rotate_relative(p, p1, chi, fr.e2 * std::cos(phi) + fr.e3 * std::sin(phi));
        bool in_a = true, in_b = true;
        const double ra = ctx.read(out.p, &in_a);
        const double rb = ctx.read(out.p1, &in_b);
        // f(p')f(p1')/f(p1) - f(p), written through the interpolated field.
        const double x = rate * wp * (ra * rb / field[j] - rp);
        sum += x;
        sum2 += x * x;
        loss += rate * fp;
        if (!in_a || !in_b) {
            ++clipped;
            clipped_loss += rate * fp;
        }
    }
    const double ns = static_cast<double>(s_count);
    est.mean = sum / ns;
    est.std_error = s_count > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / ns) / (ns - 1.0)) / ns) : 0.0;
    est.clipped_fraction = static_cast<double>(clipped) / ns;
    est.loss = loss / ns;
    // Each sample is a handful of products of nearly equal numbers; a few
    // dozen ulps of the loss term bound its rounding error.
    est.roundoff = 32.0 * std::numeric_limits<double>::epsilon() * est.loss;
    est.clipped_loss = clipped_loss / ns;
    return est;
}

CollisionEstimate collision_integral(const VelocityDistribution& f, std::size_t node, const ScatteringKernel& kernel,
                                     const CollisionParams& params, std::uint64_t stream)
{
    check_params(params);
    if (params.density == 0.0)
        return {};
    return collision_integral(CollisionContext(f, params), node, kernel, params, stream);
}

namespace {

std::vector<char> active_nodes(const VelocityDistribution& f, double mass, double skip_below)
{
    std::vector<char> active(f.values().size(), 1);
    if (!(skip_below > 0.0))
        return active;
    const VelocityDistribution maxw = matched_maxwellian(f, mass);
    const double fmax = *std::max_element(f.values().begin(), f.values().end());
    const double mmax = *std::max_element(maxw.values().begin(), maxw.values().end());
    for (std::size_t k = 0; k < active.size(); ++k)
        active[k] = (f[k] >= skip_below * fmax || maxw[k] >= skip_below * mmax) ? 1 : 0;
    return active;
}

} // namespace

std::vector<CollisionEstimate> collision_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                               const CollisionParams& params, std::uint64_t stream, double skip_below)
{
    check_params(params);
    std::vector<CollisionEstimate> out(f.values().size());
    if (params.density == 0.0)
        return out;
    const CollisionContext ctx(f, params);
    const std::vector<char> active = active_nodes(f, params.mass, skip_below);
    const long count = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long k = 0; k < count; ++k)
        if (active[static_cast<std::size_t>(k)])
            out[static_cast<std::size_t>(k)] =
                collision_integral(ctx, static_cast<std::size_t>(k), kernel, params, stream);
    return out;
}

namespace reference {

std::vector<CollisionEstimate> collision_rates_serial(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                                      const CollisionParams& params, std::uint64_t stream,
                                                      double skip_below)
{
    check_params(params);
    std::vector<CollisionEstimate> out(f.values().size());
    if (params.density == 0.0)
        return out;
    const CollisionContext ctx(f, params);
    const std::vector<char> active = active_nodes(f, params.mass, skip_below);
    for (std::size_t k = 0; k < out.size(); ++k)
        if (active[k])
            out[k] = collision_integral(ctx, k, kernel, params, stream);
    return out;
}

} // namespace reference

namespace {

// Explicit update f + dt * rate, negative values clipped. Returns clipped mass.
double apply_rates(VelocityDistribution& f, const std::vector<CollisionEstimate>& rates, double dt)
{
    double clipped = 0.0;
    auto& v = f.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] += dt * rates[k].mean;
        if (v[k] < 0.0) {
            clipped -= v[k];
            v[k] = 0.0;
        }
    }
    return clipped * f.grid().cell_volume();
}

double stability_ratio(const VelocityDistribution& f, const std::vector<CollisionEstimate>& rates, double dt)
{
    double rmax = 0.0;
    for (const auto& r : rates)
        rmax = std::max(rmax, std::fabs(r.mean));
    const double fmax = *std::max_element(f.values().begin(), f.values().end());
    return dt * rmax / fmax;
}

std::vector<CollisionEstimate> guarded_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                             const HomogeneousConfig& cfg, std::uint64_t stream, double dt,
                                             double* ratio)
{
    auto rates = collision_rates(f, kernel, cfg.collision, stream, cfg.skip_below);
    *ratio = stability_ratio(f, rates, dt);
    if (!(*ratio < 0.1))
        throw StepSizeError(
            fmt::format("stability guard: dt * max|St f| = {:.3g} max f exceeds 0.1 max f; shorten dt", *ratio));
    return rates;
}

} // namespace

VelocityDistribution step_homogeneous(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                      const HomogeneousConfig& cfg, const Moments& target, std::uint64_t step_index,
                                      StepLog* log)
{
    if (!(cfg.dt >= 0.0))
        throw DomainError("time step must be non-negative");
    StepLog local;
    if (cfg.dt == 0.0 || cfg.collision.density == 0.0) {
        if (log)
            *log = local;
        return f;
    }
    const double dt = cfg.dt;
    const double m = cfg.collision.mass;
    double ratio = 0.0;
    std::vector<CollisionEstimate> rates;
    if (cfg.scheme == TimeScheme::ForwardEuler) {
        rates = guarded_rates(f, kernel, cfg, 2 * step_index, dt, &ratio);
    } else {
        auto first = guarded_rates(f, kernel, cfg, 2 * step_index, 0.5 * dt, &ratio);
        VelocityDistribution half = f;
        apply_rates(half, first, 0.5 * dt);
        double ratio2 = 0.0;
        rates = guarded_rates(half, kernel, cfg, 2 * step_index + 1, dt, &ratio2);
        ratio = std::max(ratio, ratio2);
    }
    local.stability_ratio = ratio;

    const double dv = f.grid().cell_volume();
    double noise = 0.0, roundoff = 0.0, h_var = 0.0, loss = 0.0, clipped_loss = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        noise += rates[k].std_error;
        roundoff += rates[k].roundoff;
        if (f[k] > 0.0) {
            const double w = (1.0 + std::log(f[k])) * (rates[k].std_error + rates[k].roundoff) * dv;
            h_var += w * w;
        }
        loss += rates[k].loss;
        clipped_loss += rates[k].clipped_loss;
    }
    local.noise_l1 = dt * noise * dv;
    local.roundoff_l1 = dt * roundoff * dv;
    local.h_noise = dt * std::sqrt(h_var);
    local.clipped_throughput = loss > 0.0 ? clipped_loss / loss : 0.0;

    VelocityDistribution out = f;
    local.clipped_mass = apply_rates(out, rates, dt);

    const Moments raw = moments(out, m);
    local.raw_mass_drift = std::fabs(raw.mass - target.mass) / target.mass;
    const double p_scale = std::sqrt(2.0 * m * target.energy / target.mass);
    local.raw_momentum_drift = norm(raw.mean_momentum - target.mean_momentum) / p_scale;
    local.raw_energy_drift = std::fabs(raw.energy - target.energy) / target.energy;

    for (double& v : out.values())
        v *= target.mass / raw.mass;
    if (cfg.correct_conservation)
        conservation_correction(out, target, m);
    if (log)
        *log = local;
    return out;
}

void HTrace::write_csv(std::ostream& out) const
{
    out << "t,H,mass,px,py,pz,E,L1_to_maxwell\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        const Moments& mo = moments[k];
        const Vec3 p = mo.mean_momentum * mo.mass;
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", times[k], h[k],
                           mo.mass, p.x, p.y, p.z, mo.energy, l1_to_maxwell[k]);
    }
}

double HTrace::accumulated_noise() const
{
    double s = 0.0, r = 0.0;
    for (double v : noise_l1)
        s += v * v;
    for (double v : roundoff_l1)
        r += v;
    return std::sqrt(s) + r;
}

HTrace relax_to_equilibrium(const VelocityDistribution& f0, const ScatteringKernel& kernel,
                            const HomogeneousConfig& cfg, double t_final, const std::vector<double>& checkpoint_times)
{
    if (!(t_final >= 0.0) || !(cfg.dt > 0.0))
        throw DomainError("relaxation needs t_final >= 0 and dt > 0");
    const double m = cfg.collision.mass;
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_final / cfg.dt));
    std::vector<std::size_t> marks;
    for (double t : checkpoint_times)
        marks.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));

    HTrace tr;
    const Moments target = moments(f0, m);
    VelocityDistribution f = f0;
    auto record = [&](std::size_t k) {
        tr.times.push_back(static_cast<double>(k) * cfg.dt);
        tr.h.push_back(h_functional(f));
        tr.moments.push_back(moments(f, m));
        tr.l1_to_maxwell.push_back(l1_distance(f, matched_maxwellian(f, m)));
        for (std::size_t mk : marks)
            if (mk == k)
                tr.checkpoints.push_back(f);
    };
    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        StepLog log;
        f = step_homogeneous(f, kernel, cfg, target, k - 1, &log);
        tr.logs.push_back(log);
        tr.h_noise.push_back(log.h_noise);
        tr.noise_l1.push_back(log.noise_l1);
        tr.roundoff_l1.push_back(log.roundoff_l1);
        record(k);
    }
    tr.final_state = f;
    return tr;
}

SlopeFit h_slope(const HTrace& trace, double confidence)
{
    const std::size_t n = trace.times.size();
    if (n < 3)
        throw DomainError("slope fit needs at least three samples");
    double tm = 0.0, hm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        tm += trace.times[k];
        hm += trace.h[k];
    }
    tm /= static_cast<double>(n);
    hm /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (trace.times[k] - tm) * (trace.times[k] - tm);
        sxy += (trace.times[k] - tm) * (trace.h[k] - hm);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = trace.h[k] - hm - fit.slope * (trace.times[k] - tm);
        ssr += r * r;
    }
    fit.std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    fit.upper_bound = fit.slope + boost::math::quantile(dist, confidence) * fit.std_error;
    return fit;
}

double relaxation_time(const HTrace& trace)
{
    const auto& d = trace.l1_to_maxwell;
    if (d.empty())
        return std::numeric_limits<double>::infinity();
    const double level = d.front() / std::numbers::e;
    for (std::size_t k = 1; k < d.size(); ++k)
        if (d[k] <= level) {
            const double s = (d[k - 1] - level) / (d[k - 1] - d[k]);
            return trace.times[k - 1] + s * (trace.times[k] - trace.times[k - 1]);
        }
    return std::numeric_limits<double>::infinity();
}

} // namespace kinetic
