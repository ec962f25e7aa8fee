#include "kinetic/core.hpp"

#include <cmath>
#include <string>

namespace kinetic {

SpatialDomain SpatialDomain::cube(int dimension, double side, BoundaryMode mode)
{
    SpatialDomain d;
    d.dimension = dimension;
    d.lengths = {side, dimension == 3 ? side : 0.0, dimension == 3 ? side : 0.0};
    d.boundary = mode;
    d.validate();
    return d;
}

double SpatialDomain::volume() const
{
    return dimension == 1 ? lengths.x : lengths.x * lengths.y * lengths.z;
}

bool SpatialDomain::contains(const Vec3& q) const
{
    for (int k = 0; k < dimension; ++k)
        if (!(q[k] > 0.0 && q[k] < lengths[k]))
            return false;
    return true;
}

void SpatialDomain::validate() const
{
    if (dimension != 1 && dimension != 3)
        throw DomainError("domain dimension must be 1 or 3, got " + std::to_string(dimension));
    for (int k = 0; k < dimension; ++k)
        if (!(lengths[k] > 0.0) || !std::isfinite(lengths[k]))
            throw DomainError("domain side lengths must be positive");
}

ConfiningPotential ConfiningPotential::none()
{
    return {};
}

ConfiningPotential ConfiningPotential::soft_walls(const SpatialDomain& domain, double stiffness)
{
    domain.validate();
    if (!(stiffness > 0.0))
        throw DomainError("wall stiffness must be positive");
    ConfiningPotential u;
    u.stiffness_ = stiffness;
    u.dimension_ = domain.dimension;
    u.lengths_ = domain.lengths;
    return u;
}

double ConfiningPotential::energy(const Vec3& q) const
{
    if (is_zero())
        return 0.0;
    double e = 0.0;
    for (int k = 0; k < dimension_; ++k) {
        double lo = q[k];
        double hi = lengths_[k] - q[k];
        if (lo <= 0.0 || hi <= 0.0)
            return HUGE_VAL;
        e += 1.0 / (lo * lo) + 1.0 / (hi * hi);
    }
    return stiffness_ * e;
}

Vec3 ConfiningPotential::force(const Vec3& q) const
{
    Vec3 f{};
    if (is_zero())
        return f;
    for (int k = 0; k < dimension_; ++k) {
        double lo = q[k];
        double hi = lengths_[k] - q[k];
        // -d/dq [lo^-2 + hi^-2] = 2 lo^-3 - 2 hi^-3
        f[k] = 2.0 * stiffness_ * (1.0 / (lo * lo * lo) - 1.0 / (hi * hi * hi));
    }
    return f;
}

void ParticleEnsemble::validate(const SpatialDomain& domain) const
{
    if (positions.empty())
        throw InputError("ensemble needs at least one particle");
    if (positions.size() != momenta.size())
        throw InputError("positions and momenta differ in length");
    if (!(mass > 0.0))
        throw DomainError("particle mass must be positive");
    for (const auto& q : positions)
        if (!domain.contains(q))
            throw DomainError("particle position outside the domain");
}

} // namespace kinetic
