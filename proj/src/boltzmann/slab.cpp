#include "kinetic/boltzmann.hpp"

#include <cmath>

namespace kinetic {

SlabDistribution::SlabDistribution(double length, std::size_t nq, VelocityGrid grid)
    : length_(length), nq_(nq), grid_(grid), values_(nq * grid.size(), 0.0)
{
    grid_.validate();
    if (!(length > 0.0) || nq < 4)
        throw DomainError("slab needs a positive length and at least 4 cells");
}

double SlabDistribution::mass() const
{
    double s = 0.0;
    for (double v : values_)
        s += v;
    return s * grid_.cell_volume() * length_ / static_cast<double>(nq_);
}

VelocityDistribution SlabDistribution::local(std::size_t iq) const
{
    VelocityDistribution out(grid_);
    for (std::size_t k = 0; k < grid_.size(); ++k)
        out.values()[k] = at(iq, k);
    return out;
}

SlabDistribution transport_step(const SlabDistribution& f, const ConfiningPotential& walls, double mass, double dt)
{
    if (!(dt >= 0.0))
        throw DomainError("transport step must be non-negative");
    if (dt == 0.0)
        return f;
    const auto& vg = f.grid();
    const std::size_t n = vg.n;
    const PhaseGrid pg{f.length(), f.nq(), vg.p_cap, n};
    // Semi-Lagrangian shifts are stable at any Courant number, but a
    // characteristic must not cross the slab more than once per step.
    if (vg.p_cap * dt / mass > f.length())
        throw StepSizeError("transport step: fastest particle crosses the slab more than once; shorten dt");
    const PhaseBoundary mode = walls.is_zero() ? PhaseBoundary::HardWall : PhaseBoundary::Confining;
    SlabDistribution out = f;
    const long slices = static_cast<long>(n * n);
#pragma omp parallel for schedule(static)
    for (long s = 0; s < slices; ++s) {
        const std::size_t ky = static_cast<std::size_t>(s) % n;
        const std::size_t kz = static_cast<std::size_t>(s) / n;
        PhaseDensity rho(pg, mode);
        double total = 0.0;
        for (std::size_t kx = 0; kx < n; ++kx)
            for (std::size_t iq = 0; iq < f.nq(); ++iq) {
                const double v = f.at(iq, vg.index(kx, ky, kz));
                rho.at(iq, kx) = v;
                total += v;
            }
        if (total == 0.0)
            continue;
        const PhaseDensity next = liouville_step(rho, walls, mass, dt);
        for (std::size_t kx = 0; kx < n; ++kx)
            for (std::size_t iq = 0; iq < f.nq(); ++iq)
                out.at(iq, vg.index(kx, ky, kz)) = next.at(iq, kx);
    }
    return out;
}

SlabDistribution strang_step(const SlabDistribution& f, const ScatteringKernel& kernel, const HomogeneousConfig& cfg,
                             std::uint64_t step_index)
{
    const double m = cfg.collision.mass;
    SlabDistribution half = transport_step(f, ConfiningPotential::none(), m, 0.5 * cfg.dt);
    const double total = half.mass();
    for (std::size_t iq = 0; iq < f.nq(); ++iq) {
        VelocityDistribution loc = half.local(iq);
        const double local_mass = loc.mass();
        if (!(local_mass > 0.0))
            continue;
        // Local number density relative to the slab average.
        HomogeneousConfig lc = cfg;
        lc.collision.density = cfg.collision.density * local_mass * f.length() / total;
        lc.collision.seed = cfg.collision.seed + 0x9e3779b97f4a7c15ULL * (iq + 1);
        for (double& v : loc.values())
            v /= local_mass;
        const Moments target = moments(loc, m);
        VelocityDistribution next = step_homogeneous(loc, kernel, lc, target, step_index);
        for (std::size_t k = 0; k < f.grid().size(); ++k)
            half.at(iq, k) = next[k] * local_mass;
    }
    return transport_step(half, ConfiningPotential::none(), m, 0.5 * cfg.dt);
}

} // namespace kinetic
