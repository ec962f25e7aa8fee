#include "kinetic/core.hpp"

#include <cmath>
#include <limits>

namespace kinetic {

InteractionPotential InteractionPotential::power_law(double coefficient, double exponent, double scale)
{
    InteractionPotential p;
    p.kind = PotentialKind::PowerLaw;
    p.coefficient = coefficient;
    p.exponent = exponent;
    p.scale = scale;
    p.validate();
    return p;
}

InteractionPotential InteractionPotential::hard_sphere(double diameter, double scale)
{
    InteractionPotential p;
    p.kind = PotentialKind::HardSphere;
    p.diameter = diameter;
    p.scale = scale;
    p.validate();
    return p;
}

InteractionPotential InteractionPotential::none(double scale)
{
    InteractionPotential p;
    p.kind = PotentialKind::None;
    p.coefficient = 0.0;
    p.scale = scale;
    p.validate();
    return p;
}

void InteractionPotential::validate() const
{
    if (!(scale > 0.0))
        throw DomainError("potential scale mu must be positive");
    switch (kind) {
    case PotentialKind::PowerLaw:
        if (!(coefficient > 0.0))
            throw DomainError("potential coefficient C must be positive");
        if (!(exponent > 2.0))
            throw DomainError("potential exponent gamma must exceed 2");
        break;
    case PotentialKind::HardSphere:
        if (!(diameter > 0.0))
            throw DomainError("hard-sphere diameter must be positive");
        break;
    case PotentialKind::None:
        break;
    }
}

double InteractionPotential::value(double s) const
{
    if (!(s > 0.0))
        throw DomainError("potential evaluated at non-positive separation");
    switch (kind) {
    case PotentialKind::PowerLaw:
        return coefficient * std::pow(s, -exponent);
    case PotentialKind::HardSphere:
        return s < diameter ? std::numeric_limits<double>::infinity() : 0.0;
    case PotentialKind::None:
        break;
    }
    return 0.0;
}

double InteractionPotential::derivative(double s) const
{
    if (!(s > 0.0))
        throw DomainError("potential evaluated at non-positive separation");
    if (kind == PotentialKind::PowerLaw)
        return -exponent * coefficient * std::pow(s, -exponent - 1.0);
    return 0.0;
}

double potential_value(const InteractionPotential& pot, double r)
{
    return pot.value(r);
}

} // namespace kinetic
