#include "kinetic/liouville.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kinetic {

void PhaseGrid::validate() const
{
    if (!(length > 0.0) || !(p_cap > 0.0))
        throw DomainError("phase grid needs positive length and momentum cap");
    if (nq < 4 || np < 4)
        throw DomainError("phase grid needs at least 4 cells per axis");
}

PhaseDensity::PhaseDensity(PhaseGrid grid, PhaseBoundary boundary)
    : grid_(grid), boundary_(boundary), values_(grid.nq * grid.np, 0.0)
{
    grid_.validate();
}

PhaseDensity PhaseDensity::from_function(PhaseGrid grid, const std::function<double(double, double)>& f,
                                         PhaseBoundary boundary)
{
    PhaseDensity rho(grid, boundary);
    for (std::size_t j = 0; j < grid.np; ++j)
        for (std::size_t i = 0; i < grid.nq; ++i) {
            double v = f(grid.q(i), grid.p(j));
            if (!(v >= 0.0))
                throw DomainError("phase density must be non-negative");
            rho.at(i, j) = v;
        }
    rho.normalize();
    return rho;
}

double PhaseDensity::mass() const
{
    double s = 0.0;
    for (double v : values_)
        s += v;
    return s * grid_.dq() * grid_.dp();
}

void PhaseDensity::normalize()
{
    const double m = mass();
    if (!(m > 0.0))
        throw DomainError("cannot normalize a phase density with zero mass");
    for (double& v : values_)
        v /= m;
}

double PhaseDensity::max_value() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double PhaseDensity::momentum_variance() const
{
    const double cell = grid_.dq() * grid_.dp();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < grid_.np; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < grid_.nq; ++i)
            col += at(i, j);
        col *= cell;
        const double p = grid_.p(j);
        m0 += col;
        m1 += col * p;
        m2 += col * p * p;
    }
    const double mean = m1 / m0;
    return std::max(0.0, m2 / m0 - mean * mean);
}

double PhaseDensity::boundary_mass_fraction() const
{
    double edge = 0.0;
    for (std::size_t i = 0; i < grid_.nq; ++i)
        edge += at(i, 0) + at(i, grid_.np - 1);
    return edge * grid_.dq() * grid_.dp() / mass();
}

void PhaseDensity::write_csv(std::ostream& out) const
{
    out << "q,p,rho\n";
    for (std::size_t j = 0; j < grid_.np; ++j)
        for (std::size_t i = 0; i < grid_.nq; ++i)
            out << fmt::format("{:.17g},{:.17g},{:.17g}\n", grid_.q(i), grid_.p(j), at(i, j));
}

std::vector<double> position_marginal(const PhaseDensity& rho)
{
    const auto& g = rho.grid();
    std::vector<double> sigma(g.nq, 0.0);
    for (std::size_t j = 0; j < g.np; ++j)
        for (std::size_t i = 0; i < g.nq; ++i)
            sigma[i] += rho.at(i, j);
    for (double& s : sigma)
        s *= g.dp();
    return sigma;
}

double uniformity_distance(const std::vector<double>& sigma, double length)
{
    if (sigma.empty() || !(length > 0.0))
        throw DomainError("uniformity distance needs a non-empty marginal and positive length");
    const double h = length / static_cast<double>(sigma.size());
    double d = 0.0;
    for (double s : sigma)
        d += std::fabs(s - 1.0 / length);
    return 0.5 * d * h;
}

void write_marginal_csv(std::ostream& out, const std::vector<double>& sigma, double length)
{
    const double h = length / static_cast<double>(sigma.size());
    out << "q,sigma\n";
    for (std::size_t i = 0; i < sigma.size(); ++i)
        out << fmt::format("{:.17g},{:.17g}\n", (static_cast<double>(i) + 0.5) * h, sigma[i]);
}

} // namespace kinetic
