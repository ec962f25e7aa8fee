#include "kinetic/core.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace kinetic {

namespace {

// Label-independent visiting order: by position, ties broken by |p|^2 so that
// momentum reversal leaves the order unchanged.
std::vector<std::size_t> canonical_order(const ParticleEnsemble& ens)
{
    std::vector<std::size_t> idx(ens.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Vec3& qa = ens.positions[a];
        const Vec3& qb = ens.positions[b];
        return std::make_tuple(qa.x, qa.y, qa.z, norm2(ens.momenta[a]))
             < std::make_tuple(qb.x, qb.y, qb.z, norm2(ens.momenta[b]));
    });
    return idx;
}

} // namespace

double kinetic_energy(const ParticleEnsemble& ens)
{
    double e = 0.0;
    for (std::size_t i : canonical_order(ens))
        e += norm2(ens.momenta[i]);
    return e / (2.0 * ens.mass);
}

Vec3 total_momentum(const ParticleEnsemble& ens)
{
    Vec3 s{};
    for (const auto& p : ens.momenta)
        s += p;
    return s;
}

double hamiltonian(const ParticleEnsemble& ens, const InteractionPotential& pot, const ConfiningPotential& walls)
{
    if (ens.positions.size() != ens.momenta.size())
        throw InputError("positions and momenta differ in length");
    const auto order = canonical_order(ens);
    const std::size_t n = order.size();

    double kinetic = 0.0;
    double external = 0.0;
    for (std::size_t i : order) {
        kinetic += norm2(ens.momenta[i]);
        external += walls.energy(ens.positions[i]);
    }
    kinetic /= 2.0 * ens.mass;

    double interaction = 0.0;
    if (pot.kind != PotentialKind::None) {
        for (std::size_t a = 0; a < n; ++a) {
            const Vec3& qa = ens.positions[order[a]];
            for (std::size_t b = a + 1; b < n; ++b) {
                double r = norm(qa - ens.positions[order[b]]);
                if (r == 0.0)
                    throw SingularityError("coincident particle positions in hamiltonian");
                interaction += pot.pair_energy(r);
            }
        }
    }
    return kinetic + interaction + external;
}

} // namespace kinetic
