#include "kinetic/liouville.hpp"

#include "kinetic/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kinetic {

namespace {

// 4-point Lagrange cubic between f0 and f1 at fraction s, clipped to the
// bracketing values so that no new extrema appear.
inline double clipped_cubic(double fm, double f0, double f1, double f2, double s)
{
    const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
    const double v = wm * fm + w0 * f0 + w1 * f1 + w2 * f2;
    return std::clamp(v, std::min(f0, f1), std::max(f0, f1));
}

inline long floor_index(double x)
{
    return static_cast<long>(std::floor(x));
}

inline long wrap(long k, long n)
{
    k %= n;
    return k < 0 ? k + n : k;
}

// Value of the free-flight density at unfolded cell k (any integer) for the
// momentum column j. The box of length L is unfolded onto a circle of
// length 2L: cells [nq, 2nq) are the physical ones, cells [0, nq) cover
// x in [-L, 0) and carry rho(-x, -p).
inline double unfolded_value(const PhaseDensity& rho, long k, std::size_t j)
{
    const auto& g = rho.grid();
    const long nq = static_cast<long>(g.nq);
    const long kk = wrap(k, 2 * nq);
    if (kk >= nq)
        return rho.at(static_cast<std::size_t>(kk - nq), j);
    return rho.at(static_cast<std::size_t>(nq - 1 - kk), g.np - 1 - j);
}

inline double open_value(const PhaseDensity& rho, long i, std::size_t j)
{
    if (i < 0 || i >= static_cast<long>(rho.grid().nq))
        return 0.0;
    return rho.at(static_cast<std::size_t>(i), j);
}

// Clipped bicubic lookup for the soft-wall path. Positions outside the grid
// clamp to the edge cells; momenta outside the grid read zero.
double interpolate_2d(const PhaseDensity& rho, double q, double p)
{
    const auto& g = rho.grid();
    const double xq = q / g.dq() - 0.5;
    const double xp = (p + g.p_cap) / g.dp() - 0.5;
    const long iq = floor_index(xq);
    const long jp = floor_index(xp);
    const double sq = xq - static_cast<double>(iq);
    const double sp = xp - static_cast<double>(jp);
    auto value = [&](long i, long j) {
        if (j < 0 || j >= static_cast<long>(g.np))
            return 0.0;
        i = std::clamp(i, 0L, static_cast<long>(g.nq) - 1);
        return rho.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    };
    double rows[4];
    for (int r = 0; r < 4; ++r) {
        const long j = jp - 1 + r;
        rows[r] = clipped_cubic(value(iq - 1, j), value(iq, j), value(iq + 1, j), value(iq + 2, j), sq);
    }
    return clipped_cubic(rows[0], rows[1], rows[2], rows[3], sp);
}

// Backward characteristic of q' = p/m, p' = -U'(q) by velocity Verlet with
// negative step; substeps keep |p| dt / m below one cell.
void trace_back(double& q, double& p, const ConfiningPotential& walls, double mass, double dt, double dq)
{
    const std::size_t substeps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::fabs(p) * dt / (mass * dq))) + 1);
    const double h = -dt / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
        p += 0.5 * h * walls.force(Vec3{q, 0.0, 0.0}).x;
        q += h * p / mass;
        p += 0.5 * h * walls.force(Vec3{q, 0.0, 0.0}).x;
    }
}

void check_step_inputs(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt)
{
    if (!(mass > 0.0))
        throw DomainError("particle mass must be positive");
    if (!(dt >= 0.0))
        throw DomainError("Liouville time step must be non-negative");
    const bool confining = rho.boundary() == PhaseBoundary::Confining;
    if (confining && walls.is_zero())
        throw DomainError("confining phase boundary needs a soft-wall potential");
    if (!confining && !walls.is_zero())
        throw DomainError("soft-wall potential supplied for a hard-wall or open phase grid");
}

double general_node(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt, std::size_t i,
                    std::size_t j, bool& capacity)
{
    const auto& g = rho.grid();
    double q = g.q(i);
    double p = g.p(j);
    trace_back(q, p, walls, mass, dt, g.dq());
    if (!(q > 0.0 && q < g.length) || std::fabs(p) > g.p_cap) {
        capacity = true;
        return 0.0;
    }
    return interpolate_2d(rho, q, p);
}

void finish(PhaseDensity& out, const PhaseDensity& in, LiouvilleStepLog* log)
{
    const double before = in.mass();
    const double raw = out.mass();
    if (log)
        log->raw_mass_drift = std::fabs(raw - before);
    if (out.boundary() != PhaseBoundary::Open && raw > 0.0) {
        const double scale = before / raw;
        for (double& v : out.values())
            v *= scale;
    }
}

} // namespace

PhaseDensity liouville_step(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt,
                            LiouvilleStepLog* log)
{
    check_step_inputs(rho, walls, mass, dt);
    if (dt == 0.0) {
        if (log)
            log->raw_mass_drift = 0.0;
        return rho;
    }

    const auto& g = rho.grid();
    const long nq = static_cast<long>(g.nq);
    const long np = static_cast<long>(g.np);
    PhaseDensity out(g, rho.boundary());
    bool capacity = false;

    if (rho.boundary() == PhaseBoundary::Confining) {
#pragma omp parallel for schedule(static) reduction(|| : capacity)
        for (long j = 0; j < np; ++j)
            for (long i = 0; i < nq; ++i)
                out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    general_node(rho, walls, mass, dt, static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                 capacity);
        if (capacity)
            throw CapacityError("backward characteristic left the phase grid; raise p_cap or shorten dt");
    } else {
        const bool open = rho.boundary() == PhaseBoundary::Open;
#pragma omp parallel for schedule(static)
        for (long j = 0; j < np; ++j) {
            const std::size_t col = static_cast<std::size_t>(j);
            // Free flight: every node of column j moves by the same shift.
            const double shift = g.p(col) * dt / (mass * g.dq());
            // Column buffer: physical cells, or the 2L-periodic unfolding.
            std::vector<double> u;
            const long period = open ? nq : 2 * nq;
            u.resize(static_cast<std::size_t>(period));
            if (open) {
                for (long k = 0; k < nq; ++k)
                    u[static_cast<std::size_t>(k)] = rho.at(static_cast<std::size_t>(k), col);
            } else {
                for (long k = 0; k < nq; ++k) {
                    u[static_cast<std::size_t>(nq + k)] = rho.at(static_cast<std::size_t>(k), col);
                    u[static_cast<std::size_t>(nq - 1 - k)] = rho.at(static_cast<std::size_t>(k), g.np - 1 - col);
                }
            }
            auto fetch = [&](long k) {
                if (open)
                    return (k < 0 || k >= nq) ? 0.0 : u[static_cast<std::size_t>(k)];
                return u[static_cast<std::size_t>(wrap(k, period))];
            };
            const long offset = open ? 0 : nq;
            for (long i = 0; i < nq; ++i) {
                const double x = static_cast<double>(i + offset) - shift;
                const long base = floor_index(x);
                const double s = x - static_cast<double>(base);
                out.at(static_cast<std::size_t>(i), col) =
                    clipped_cubic(fetch(base - 1), fetch(base), fetch(base + 1), fetch(base + 2), s);
            }
        }
    }
    finish(out, rho, log);
    return out;
}

DelocalizationSeries delocalization_experiment(const PhaseDensity& rho0, const ConfiningPotential& walls, double mass,
                                               double t_final, const DelocalizationOptions& opts)
{
    if (!(t_final > 0.0) || opts.steps == 0)
        throw DomainError("delocalization run needs t_final > 0 and at least one step");
    const double p_scale = rho0.grid().p_cap;
    if (rho0.momentum_variance() <= 1e-12 * p_scale * p_scale)
        throw DomainError("initial density has no momentum spread; free flight cannot delocalize it");
    const double length = rho0.grid().length;
    const double d0 = uniformity_distance(position_marginal(rho0), length);
    if (opts.require_localized && !(d0 > 0.5))
        throw DomainError(fmt::format("initial density is not localized (distance to uniform {:.3g} <= 0.5)", d0));

    DelocalizationSeries series{{0.0}, {d0}, rho0, 0.0};
    const double dt = t_final / static_cast<double>(opts.steps);
    PhaseDensity rho = rho0;
    for (std::size_t k = 1; k <= opts.steps; ++k) {
        LiouvilleStepLog log;
        rho = liouville_step(rho, walls, mass, dt, &log);
        series.max_raw_mass_drift = std::max(series.max_raw_mass_drift, log.raw_mass_drift);
        series.times.push_back(static_cast<double>(k) * dt);
        series.distance.push_back(uniformity_distance(position_marginal(rho), length));
    }
    series.final_state = std::move(rho);
    return series;
}

void DelocalizationSeries::write_json(std::ostream& out) const
{
    out << "[\n";
    for (std::size_t k = 0; k < times.size(); ++k)
        out << fmt::format("  {{\"t\": {:.17g}, \"uniformity_distance\": {:.17g}}}{}\n", times[k], distance[k],
                           k + 1 < times.size() ? "," : "");
    out << "]\n";
}

std::vector<double> characteristics_marginal(const GaussianDensity& q0, const GaussianDensity& p0, double length,
                                             double mass, double t, PhaseBoundary boundary, std::size_t samples,
                                             std::size_t bins, std::uint64_t seed)
{
    if (boundary == PhaseBoundary::Confining)
        throw DomainError("characteristics oracle covers free flight only");
    if (!(length > 0.0) || !(mass > 0.0) || samples == 0 || bins == 0 || !(q0.sigma > 0.0) || !(p0.sigma > 0.0))
        throw DomainError("characteristics oracle needs L, m, sigmas > 0, samples and bins");
    if (!(q0.mass_between(0.0, length) > 1e-12))
        throw DomainError("characteristics oracle: q0 has no mass inside the box");
    auto rng = make_stream(seed, 0x63686172ULL, samples);
    std::normal_distribution<double> nq(q0.mean, q0.sigma), np(p0.mean, p0.sigma);
    std::vector<double> h(bins, 0.0);
    const double w = 1.0 / static_cast<double>(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        double q;
        do
            q = nq(rng);
        while (!(q > 0.0 && q < length));
        double x = q + np(rng) * t / mass;
        if (boundary == PhaseBoundary::Open) {
            if (!(x >= 0.0 && x < length))
                continue;
        } else {
            // Unfold the reflections: period 2L, mirrored on the second half.
            x = std::fmod(x, 2.0 * length);
            if (x < 0.0)
                x += 2.0 * length;
            if (x > length)
                x = 2.0 * length - x;
        }
        h[std::min(bins - 1, static_cast<std::size_t>(x / length * static_cast<double>(bins)))] += w;
    }
    return h;
}

std::vector<double> coarsen(const std::vector<double>& fine, std::size_t coarse, double weight)
{
    if (coarse == 0 || fine.size() % coarse != 0)
        throw DomainError(fmt::format("cannot coarsen {} cells into {}", fine.size(), coarse));
    const std::size_t group = fine.size() / coarse;
    std::vector<double> out(coarse, 0.0);
    for (std::size_t i = 0; i < fine.size(); ++i)
        out[i / group] += fine[i] * weight;
    return out;
}

namespace reference {

PhaseDensity liouville_step_serial(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt)
{
    check_step_inputs(rho, walls, mass, dt);
    if (dt == 0.0)
        return rho;
    const auto& g = rho.grid();
    PhaseDensity out(g, rho.boundary());
    bool capacity = false;
    for (std::size_t j = 0; j < g.np; ++j)
        for (std::size_t i = 0; i < g.nq; ++i) {
            if (rho.boundary() == PhaseBoundary::Confining) {
                out.at(i, j) = general_node(rho, walls, mass, dt, i, j, capacity);
                continue;
            }
            // Foot of the characteristic in cell-index units.
            const double x = static_cast<double>(i) - g.p(j) * dt / (mass * g.dq());
            const long base = floor_index(x);
            const double s = x - static_cast<double>(base);
            double f[4];
            for (int r = 0; r < 4; ++r) {
                const long k = base - 1 + r;
                f[r] = rho.boundary() == PhaseBoundary::Open
                           ? open_value(rho, k, j)
                           : unfolded_value(rho, k + static_cast<long>(g.nq), j);
            }
            out.at(i, j) = clipped_cubic(f[0], f[1], f[2], f[3], s);
        }
    if (capacity)
        throw CapacityError("backward characteristic left the phase grid; raise p_cap or shorten dt");
    finish(out, rho, nullptr);
    return out;
}

} // namespace reference

} // namespace kinetic
