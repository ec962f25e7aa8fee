#include "kinetic/dynamics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kinetic {

Integrator::Integrator(ParticleEnsemble ens, MdSystem sys)
    : ens_(std::move(ens)), sys_(std::move(sys)), cells_(sys_.domain, sys_.cutoff * sys_.potential.scale)
{
    sys_.validate();
    ens_.validate(sys_.domain);
    compute_forces(ens_, sys_, cells_, forces_);
}

void Integrator::kick(double half_dt)
{
    const std::size_t n = ens_.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        ens_.momenta[i] += forces_[i] * half_dt;
}

void Integrator::drift(double dt)
{
    const std::size_t n = ens_.size();
    const double inv_m = 1.0 / ens_.mass;
    const int dim = sys_.domain.dimension;
    const Vec3 L = sys_.domain.lengths;
    const bool hard = sys_.domain.boundary == BoundaryMode::HardWall;
    bool escaped = false;
#pragma omp parallel for schedule(static) reduction(|| : escaped)
    for (std::size_t i = 0; i < n; ++i) {
        Vec3& q = ens_.positions[i];
        Vec3& p = ens_.momenta[i];
        q += p * (inv_m * dt);
        for (int k = 0; k < dim; ++k) {
            if (!hard) {
                if (!(q[k] > 0.0 && q[k] < L[k]))
                    escaped = true;
                continue;
            }
            // Specular reflection; loops only if a particle crosses the box in one step.
            while (q[k] < 0.0 || q[k] > L[k]) {
                q[k] = q[k] < 0.0 ? -q[k] : 2.0 * L[k] - q[k];
                p[k] = -p[k];
            }
        }
    }
    if (escaped)
        throw IntegrationBlowup("particle left the confining potential; reduce the time step");
}

void Integrator::advance(double dt, std::size_t steps)
{
    if (!(dt >= 0.0))
        throw DomainError("time step must be non-negative");
    for (std::size_t s = 0; s < steps; ++s) {
        kick(0.5 * dt);
        drift(dt);
        compute_forces(ens_, sys_, cells_, forces_);
        kick(0.5 * dt);
        time_ += dt;
    }
}

void Integrator::reverse()
{
    for (auto& p : ens_.momenta)
        p = -p;
}

ParticleEnsemble step(const ParticleEnsemble& ens, const MdSystem& sys, double dt)
{
    Integrator it(ens, sys);
    it.advance(dt);
    return it.state();
}

TrajectoryTrace integrate(const ParticleEnsemble& ens, const MdSystem& sys, const IntegratorConfig& cfg,
                          const Observer& observer)
{
    if (!(cfg.dt > 0.0))
        throw DomainError("integrator time step must be positive");
    const std::size_t every = std::max<std::size_t>(1, cfg.sample_every);

    TrajectoryTrace trace;
    Integrator it(ens, sys);
    auto sample = [&](std::size_t k) {
        const double t = static_cast<double>(k) * cfg.dt;
        trace.times.push_back(t);
        trace.energy.push_back(hamiltonian(it.state(), sys.potential, sys.walls));
        trace.momentum.push_back(total_momentum(it.state()));
        if (cfg.keep_snapshots)
            trace.snapshots.push_back(it.state());
        if (observer)
            observer(t, it.state());
    };

    sample(0);
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
        it.advance(cfg.dt);
        if (k % every == 0 || k == cfg.steps)
            sample(k);
    }
    return trace;
}

ParticleEnsemble reverse_momenta(ParticleEnsemble ens)
{
    for (auto& p : ens.momenta)
        p = -p;
    return ens;
}

double phase_space_distance(const ParticleEnsemble& a, const ParticleEnsemble& b)
{
    if (a.size() != b.size())
        throw InputError("ensembles differ in size");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, max_abs(a.positions[i] - b.positions[i]));
        d = std::max(d, max_abs(a.momenta[i] - b.momenta[i]));
    }
    return d;
}

void TrajectoryTrace::write_csv(std::ostream& out) const
{
    out << "t,H,px_total,py_total,pz_total\n";
    for (std::size_t k = 0; k < times.size(); ++k)
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", times[k], energy[k], momentum[k].x,
                           momentum[k].y, momentum[k].z);
}

} // namespace kinetic
