#pragma once

#include <cstddef>
#include <functional>
#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "kinetic/core.hpp"

namespace kinetic {

/// Everything the integrator needs besides the particle state.
struct MdSystem {
    SpatialDomain domain;
    InteractionPotential potential;
    ConfiningPotential walls;
    // Pair forces vanish beyond cutoff * mu. The neglected tail force is
    // bounded by gamma * C * cutoff^(-gamma-1) / mu.
    double cutoff = 10.0;

    void validate() const;
};

struct IntegratorConfig {
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::size_t sample_every = 1;
    bool keep_snapshots = false;
};

struct TrajectoryTrace {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<Vec3> momentum;
    std::vector<ParticleEnsemble> snapshots;

    void write_csv(std::ostream& out) const;
};

/// Uniform grid of cells no smaller than the interaction range; particles are
/// stored cell by cell in ascending index order.
class CellList {
public:
    CellList(const SpatialDomain& domain, double min_cell_size);

    void rebuild(const std::vector<Vec3>& positions);

    std::size_t cell_of(const Vec3& q) const;
    // Distinct neighbor cells of `cell` (including itself), in fixed order.
    const std::vector<std::size_t>& neighbors(std::size_t cell) const { return neighbors_[cell]; }
    std::span<const std::size_t> members(std::size_t cell) const;

    std::size_t cell_count() const { return start_.size() - 1; }
    std::array<std::size_t, 3> shape() const { return shape_; }

private:
    int dimension_;
    Vec3 cell_size_{};
    std::array<std::size_t, 3> shape_{1, 1, 1};
    std::vector<std::vector<std::size_t>> neighbors_;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> items_;
};

/// F_i = -sum_j grad Phi(|q_i - q_j| / mu) - grad U(q_i), gathered per
/// particle over the cell list. Parallel over particles; every particle sums
/// its neighbors in a fixed order, so the result does not depend on the
/// number of threads.
std::vector<Vec3> forces(const ParticleEnsemble& ens, const MdSystem& sys);

// Same kernel with a caller-owned cell list (built for sys) and output buffer.
void compute_forces(const ParticleEnsemble& ens, const MdSystem& sys, CellList& cells, std::vector<Vec3>& out);

/// One velocity-Verlet step. Hard walls reflect specularly during the drift.
ParticleEnsemble step(const ParticleEnsemble& ens, const MdSystem& sys, double dt);

using Observer = std::function<void(double t, const ParticleEnsemble&)>;

/// Repeated velocity-Verlet steps, reusing the end-of-step forces.
class Integrator {
public:
    Integrator(ParticleEnsemble ens, MdSystem sys);

    void advance(double dt, std::size_t steps = 1);

    const ParticleEnsemble& state() const { return ens_; }
    const MdSystem& system() const { return sys_; }
    double time() const { return time_; }

    // Flip all momenta in place (forces depend on positions only).
    void reverse();

private:
    void kick(double half_dt);
    void drift(double dt);

    ParticleEnsemble ens_;
    MdSystem sys_;
    CellList cells_;
    std::vector<Vec3> forces_;
    double time_ = 0.0;
};

/// Iterate `cfg.steps` steps, sampling the energy and total momentum every
/// `cfg.sample_every` steps (and at t = 0). `observer` sees every sample.
TrajectoryTrace integrate(const ParticleEnsemble& ens, const MdSystem& sys, const IntegratorConfig& cfg,
                          const Observer& observer = {});

ParticleEnsemble reverse_momenta(ParticleEnsemble ens);

/// Largest per-coordinate difference in position and momentum.
double phase_space_distance(const ParticleEnsemble& a, const ParticleEnsemble& b);

namespace reference {

/// O(N^2) all-pairs force sum, serial. Oracle for the cell-list kernel.
std::vector<Vec3> forces_all_pairs(const ParticleEnsemble& ens, const MdSystem& sys);

} // namespace reference

} // namespace kinetic
