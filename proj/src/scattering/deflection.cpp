#include "kinetic/scattering.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kinetic {

namespace {

void check_inputs(double b, double g)
{
    if (!(b >= 0.0) || !std::isfinite(b))
        throw DomainError("impact parameter must be non-negative");
    if (!(g > 0.0) || !std::isfinite(g))
        throw DomainError("relative speed must be positive");
}

// Turning point in scaled units s = r / mu for a power law.
double power_law_turning_point(double beta, double strength, double gamma)
{
    const double head_on = std::pow(strength, 1.0 / gamma);
    if (beta == 0.0)
        return head_on;
    auto f = [&](double s) { return 1.0 - (beta * beta) / (s * s) - strength * std::pow(s, -gamma); };

    double lo = head_on;
    double hi = 2.0 * std::max(beta, head_on);
    int grow = 0;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200)
            throw NumericalError("closest approach: could not bracket the turning point (beta=" + std::to_string(beta)
                                 + ", strength=" + std::to_string(strength) + ")");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double closest_approach(double b, double g, const InteractionPotential& pot, double mass)
{
    check_inputs(b, g);
    const double mu = pot.scale;
    const double beta = b / mu;
    switch (pot.kind) {
    case PotentialKind::None:
        return b;
    case PotentialKind::HardSphere:
        return beta < pot.diameter ? mu * pot.diameter : b;
    case PotentialKind::PowerLaw: {
        const double e_rel = 0.25 * mass * g * g;
        return mu * power_law_turning_point(beta, pot.coefficient / e_rel, pot.exponent);
    }
    }
    return b;
}

double deflection_angle(double b, double g, const InteractionPotential& pot, double mass, QuadratureRule rule)
{
    check_inputs(b, g);
    const double pi = std::numbers::pi;
    const double beta = b / pot.scale;
    switch (pot.kind) {
    case PotentialKind::None:
        return 0.0;
    case PotentialKind::HardSphere:
        return beta < pot.diameter ? 2.0 * std::acos(beta / pot.diameter) : 0.0;
    case PotentialKind::PowerLaw:
        break;
    }
    if (b == 0.0)
        return pi;

    const double gamma = pot.exponent;
    const double e_rel = 0.25 * mass * g * g;
    const double s_min = power_law_turning_point(beta, pot.coefficient / e_rel, gamma);
    const double k = beta / s_min; // b / r_min, in (0, 1)
    const double k2 = k * k;

    // With u = 1 - w^2 and A = 1 - k^2 (so F(1) = 0 exactly):
    //   F(u) = (1 - u^gamma) - k^2 (u^2 - u^gamma)
    auto integrand = [=](double w) {
        const double w2 = w * w;
        const double lg = std::log1p(-w2);
        const double u = 1.0 - w2;
        const double a = -std::expm1(gamma * lg);
        const double c = -u * u * std::expm1((gamma - 2.0) * lg);
        const double f = a - k2 * c;
        if (!(f > 0.0))
            return 2.0 / std::sqrt(gamma - k2 * (gamma - 2.0));
        return 2.0 * w / std::sqrt(f);
    };

    double integral;
    if (rule == QuadratureRule::GaussLegendre64) {
        integral = boost::math::quadrature::gauss<double, 64>::integrate(integrand, 0.0, 1.0);
    } else {
        boost::math::quadrature::tanh_sinh<double> ts;
        double err = 0.0;
        integral = ts.integrate(integrand, 0.0, 1.0, 1e-12, &err);
        if (err > 1e-8 * std::max(1.0, std::fabs(integral)))
            throw NumericalError("deflection quadrature did not converge (error estimate " + std::to_string(err) + ")");
    }
    if (!std::isfinite(integral))
        throw NumericalError("deflection quadrature produced a non-finite value");
    return std::clamp(pi - 2.0 * k * integral, 0.0, pi);
}

CollisionFrame collision_frame(const Vec3& direction)
{
    const double len = norm(direction);
    if (!(len > 0.0))
        throw DomainError("collision frame needs a non-zero direction");
    CollisionFrame f;
    f.e1 = direction / len;
    int axis = 0;
    for (int k = 1; k < 3; ++k)
        if (std::fabs(f.e1[k]) < std::fabs(f.e1[axis]))
            axis = k;
    Vec3 a{};
    a[axis] = 1.0;
    Vec3 e2 = a - f.e1 * dot(a, f.e1);
    f.e2 = e2 / norm(e2);
    f.e3 = cross(f.e1, f.e2);
    return f;
}

CollisionOutcome rotate_relative(const Vec3& p, const Vec3& p1, double chi, const Vec3& towards)
{
    const Vec3 half_total = (p + p1) * 0.5;
    const Vec3 rel = (p - p1) * 0.5;
    const double k = norm(rel);
    if (!(k > 0.0))
        throw DomainError("degenerate collision: zero relative momentum");
    const Vec3 n = (rel / k) * std::cos(chi) + towards * std::sin(chi);
    return {half_total + n * k, half_total - n * k};
}

CollisionOutcome post_collision_momenta(const Vec3& p, const Vec3& p1, double b, double phi,
                                        const InteractionPotential& pot, double mass)
{
    const Vec3 d = p - p1;
    const double g = norm(d) / mass;
    if (!(g > 0.0))
        throw DomainError("degenerate collision: p equals p1");
    const double chi = deflection_angle(b, g, pot, mass);
    const CollisionFrame f = collision_frame(d);
    return rotate_relative(p, p1, chi, f.e2 * std::cos(phi) + f.e3 * std::sin(phi));
}

double b_max_for(const InteractionPotential& pot, double g, double chi_min, double mass)
{
    if (!(chi_min > 0.0 && chi_min <= std::numbers::pi))
        throw DomainError("chi_min must lie in (0, pi]");
    check_inputs(0.0, g);
    switch (pot.kind) {
    case PotentialKind::None:
        return 0.0;
    case PotentialKind::HardSphere:
        return pot.scale * pot.diameter * std::cos(0.5 * chi_min);
    case PotentialKind::PowerLaw:
        break;
    }
    double lo = 0.0;
    double hi = closest_approach(0.0, g, pot, mass);
    int grow = 0;
    while (deflection_angle(hi, g, pot, mass) >= chi_min) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200)
            throw NumericalError("b_max: deflection never drops below chi_min");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (deflection_angle(mid, g, pot, mass) < chi_min)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace kinetic
