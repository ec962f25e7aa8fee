#include "kinetic/core.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace kinetic {

double maxwell_density(const Vec3& p, double mass, double temperature, const Vec3& mean, int dimension)
{
    if (!(temperature > 0.0))
        throw DomainError("temperature must be positive");
    if (!(mass > 0.0))
        throw DomainError("mass must be positive");
    const double var = mass * temperature;
    double r2 = 0.0;
    for (int k = 0; k < dimension; ++k) {
        double d = p[k] - mean[k];
        r2 += d * d;
    }
    return std::pow(2.0 * std::numbers::pi * var, -0.5 * dimension) * std::exp(-0.5 * r2 / var);
}

double maxwell_density(double p, double mass, double temperature, double mean)
{
    return maxwell_density(Vec3{p, 0.0, 0.0}, mass, temperature, Vec3{mean, 0.0, 0.0}, 1);
}

double GaussianDensity::operator()(double x) const
{
    double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

double GaussianDensity::mass_between(double a, double b) const
{
    const double s = std::sqrt(2.0) * sigma;
    return 0.5 * (std::erf((b - mean) / s) - std::erf((a - mean) / s));
}

GaussianDensity density_from_confidence(const ConfidenceSpec& spec)
{
    if (!(spec.half_width > 0.0))
        throw DomainError("confidence half-width must be positive");
    if (!(spec.level > 0.0 && spec.level < 1.0))
        throw DomainError("confidence level must lie in (0, 1)");

    double k;
    if (spec.level == 0.683)
        k = 1.0;
    else if (spec.level == 0.954)
        k = 2.0;
    else if (spec.level == 0.997)
        k = 3.0;
    else
        k = std::sqrt(2.0) * boost::math::erf_inv(spec.level);
    return {spec.center, spec.half_width / k};
}

} // namespace kinetic
