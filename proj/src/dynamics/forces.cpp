#include "kinetic/dynamics.hpp"

namespace kinetic {

void MdSystem::validate() const
{
    domain.validate();
    potential.validate();
    if (potential.kind == PotentialKind::HardSphere)
        throw DomainError("hard-sphere potential is a scattering oracle only; use a power law for dynamics");
    if (!(cutoff > 0.0))
        throw DomainError("force cutoff must be positive");
    if (domain.boundary == BoundaryMode::Confining && walls.is_zero())
        throw DomainError("confining boundary mode requires a soft-wall potential");
    if (domain.boundary == BoundaryMode::HardWall && !walls.is_zero())
        throw DomainError("hard-wall mode and a confining potential are mutually exclusive");
}

namespace {

inline bool add_pair_force(Vec3& f, const Vec3& qi, const Vec3& qj, const InteractionPotential& pot, double range2)
{
    Vec3 d = qi - qj;
    double r2 = norm2(d);
    if (r2 >= range2)
        return true;
    if (r2 == 0.0)
        return false;
    double r = std::sqrt(r2);
    f += d * (pot.pair_force(r) / r);
    return true;
}

} // namespace

std::vector<Vec3> forces(const ParticleEnsemble& ens, const MdSystem& sys)
{
    CellList cells(sys.domain, sys.cutoff * sys.potential.scale);
    std::vector<Vec3> out;
    compute_forces(ens, sys, cells, out);
    return out;
}

void compute_forces(const ParticleEnsemble& ens, const MdSystem& sys, CellList& cells, std::vector<Vec3>& out)
{
    const std::size_t n = ens.size();
    out.resize(n);
    const bool interacting = sys.potential.kind != PotentialKind::None;
    const double range = sys.cutoff * sys.potential.scale;
    const double range2 = range * range;
    if (interacting)
        cells.rebuild(ens.positions);

    bool singular = false;
#pragma omp parallel for schedule(static) reduction(|| : singular)
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 f = sys.walls.force(ens.positions[i]);
        if (interacting) {
            const Vec3& qi = ens.positions[i];
            for (std::size_t c : cells.neighbors(cells.cell_of(qi)))
                for (std::size_t j : cells.members(c)) {
                    if (j == i)
                        continue;
                    if (!add_pair_force(f, qi, ens.positions[j], sys.potential, range2))
                        singular = true;
                }
        }
        out[i] = f;
    }
    if (singular)
        throw SingularityError("coincident particle positions in force evaluation");
}

namespace reference {

std::vector<Vec3> forces_all_pairs(const ParticleEnsemble& ens, const MdSystem& sys)
{
    const std::size_t n = ens.size();
    std::vector<Vec3> out(n);
    const double range = sys.cutoff * sys.potential.scale;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 f = sys.walls.force(ens.positions[i]);
        if (sys.potential.kind != PotentialKind::None)
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                if (!add_pair_force(f, ens.positions[i], ens.positions[j], sys.potential, range * range))
                    throw SingularityError("coincident particle positions in force evaluation");
            }
        out[i] = f;
    }
    return out;
}

} // namespace reference

} // namespace kinetic
