#include "kinetic/boltzmann.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace kinetic {

void VelocityGrid::validate() const
{
    if (n < 4 || n % 2 != 0)
        throw DomainError("velocity grid needs an even number (>= 4) of nodes per axis");
    if (!(p_cap > 0.0) || !std::isfinite(p_cap))
        throw DomainError("velocity grid needs a positive momentum cap");
}

VelocityDistribution::VelocityDistribution(VelocityGrid grid) : grid_(grid), values_(grid.size(), 0.0)
{
    grid_.validate();
}

VelocityDistribution VelocityDistribution::from_function(VelocityGrid grid,
                                                         const std::function<double(const Vec3&)>& f)
{
    VelocityDistribution out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = f(grid.node(k));
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("velocity distribution must be finite and non-negative");
        out.values_[k] = v;
    }
    out.normalize();
    return out;
}

VelocityDistribution VelocityDistribution::maxwellian(VelocityGrid grid, double mass, double temperature,
                                                      const Vec3& mean)
{
    if (!(mass > 0.0) || !(temperature > 0.0))
        throw DomainError("Maxwellian needs positive mass and temperature");
    return from_function(grid, [&](const Vec3& p) { return maxwell_density(p, mass, temperature, mean); });
}

double VelocityDistribution::mass() const
{
    double s = 0.0;
    for (double v : values_)
        s += v;
    return s * grid_.cell_volume();
}

void VelocityDistribution::normalize()
{
    const double m = mass();
    if (!(m > 0.0))
        throw DomainError("velocity distribution has zero mass");
    for (double& v : values_)
        v /= m;
}

double VelocityDistribution::interpolate(const Vec3& p, bool* inside) const
{
    const std::size_t n = grid_.n;
    const double h = grid_.h();
    const double lo = grid_.coord(0);
    std::size_t idx[3];
    double s[3];
    for (int a = 0; a < 3; ++a) {
        const double t = (p[a] - lo) / h;
        if (!(t >= 0.0 && t <= static_cast<double>(n - 1))) {
            if (inside)
                *inside = false;
            return 0.0;
        }
        std::size_t i = static_cast<std::size_t>(t);
        if (i > n - 2)
            i = n - 2;
        idx[a] = i;
        s[a] = t - static_cast<double>(i);
    }
    if (inside)
        *inside = true;
    const double* v = values_.data();
    const std::size_t sy = n, sz = n * n;
    const std::size_t base = idx[2] * sz + idx[1] * sy + idx[0];
    auto lerp = [](double a, double b, double t) { return a + t * (b - a); };
    const double c00 = lerp(v[base], v[base + 1], s[0]);
    const double c10 = lerp(v[base + sy], v[base + sy + 1], s[0]);
    const double c01 = lerp(v[base + sz], v[base + sz + 1], s[0]);
    const double c11 = lerp(v[base + sz + sy], v[base + sz + sy + 1], s[0]);
    return lerp(lerp(c00, c10, s[1]), lerp(c01, c11, s[1]), s[2]);
}

double VelocityDistribution::interpolate_cubic(const Vec3& p, bool* inside) const
{
    const long n = static_cast<long>(grid_.n);
    const double h = grid_.h();
    const double lo = grid_.coord(0);
    long idx[3];
    double w[3][4];
    bool all_in = true;
    for (int a = 0; a < 3; ++a) {
        double t = (p[a] - lo) / h;
        if (!(t >= 0.0 && t <= static_cast<double>(n - 1))) {
            all_in = false;
            t = std::clamp(t, 0.0, static_cast<double>(n - 1));
        }
        long i = static_cast<long>(t);
        if (i > n - 2)
            i = n - 2;
        idx[a] = i;
        const double s = t - static_cast<double>(i);
        const double s2 = s * s, s3 = s2 * s;
        w[a][0] = 0.5 * (-s3 + 2.0 * s2 - s);
        w[a][1] = 0.5 * (3.0 * s3 - 5.0 * s2 + 2.0);
        w[a][2] = 0.5 * (-3.0 * s3 + 4.0 * s2 + s);
        w[a][3] = 0.5 * (s3 - s2);
    }
    if (inside)
        *inside = all_in;
    auto clampi = [n](long i) { return i < 0 ? 0 : (i >= n ? n - 1 : i); };
    long ix[4], iy[4], iz[4];
    for (int c = 0; c < 4; ++c) {
        ix[c] = clampi(idx[0] - 1 + c);
        iy[c] = clampi(idx[1] - 1 + c) * n;
        iz[c] = clampi(idx[2] - 1 + c) * n * n;
    }
    const double* v = values_.data();
    double out = 0.0;
    for (int c = 0; c < 4; ++c) {
        double plane = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double* row = v + iz[c] + iy[b];
            plane += w[1][b] * (w[0][0] * row[ix[0]] + w[0][1] * row[ix[1]] + w[0][2] * row[ix[2]] +
                                w[0][3] * row[ix[3]]);
        }
        out += w[2][c] * plane;
    }
    return out > 0.0 ? out : 0.0;
}

void VelocityDistribution::write_csv(std::ostream& out) const
{
    out << "px,py,pz,f\n";
    for (std::size_t k = 0; k < values_.size(); ++k) {
        const Vec3 p = grid_.node(k);
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", p.x, p.y, p.z, values_[k]);
    }
}

Moments moments(const VelocityDistribution& f, double mass)
{
    const auto& g = f.grid();
    double m0 = 0.0, e = 0.0;
    Vec3 m1{};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double v = f[k];
        if (v == 0.0)
            continue;
        const Vec3 p = g.node(k);
        m0 += v;
        m1 += p * v;
        e += v * norm2(p);
    }
    const double dv = g.cell_volume();
    Moments out;
    out.mass = m0 * dv;
    out.mean_momentum = out.mass > 0.0 ? m1 * (dv / out.mass) : Vec3{};
    out.energy = e * dv / (2.0 * mass);
    return out;
}

double h_functional(const VelocityDistribution& f)
{
    double s = 0.0;
    for (double v : f.values())
        if (v > 0.0)
            s += v * std::log(v);
    return s * f.grid().cell_volume();
}

VelocityDistribution matched_maxwellian(const VelocityDistribution& f, double mass)
{
    const Moments mo = moments(f, mass);
    if (!(mo.mass > 0.0))
        throw DomainError("cannot match a Maxwellian to a zero-mass distribution");
    auto temperature = [mass](const Moments& m) {
        return (2.0 / 3.0) * (m.energy / m.mass - norm2(m.mean_momentum) / (2.0 * mass));
    };
    const double t_want = temperature(mo);
    if (!(t_want > 0.0))
        throw DomainError("distribution has no thermal spread");
    // The grid truncates the tails, so the continuum parameters are matched
    // on the grid itself by a short fixed-point iteration.
    double t = t_want;
    Vec3 u = mo.mean_momentum;
    VelocityDistribution m = VelocityDistribution::maxwellian(f.grid(), mass, t, u);
    for (int it = 0; it < 50; ++it) {
        const Moments mm = moments(m, mass);
        const double dt = t_want - temperature(mm);
        const Vec3 du = mo.mean_momentum - mm.mean_momentum;
        if (std::fabs(dt) <= 1e-14 * t_want && norm(du) <= 1e-14 * std::sqrt(mass * t_want))
            break;
        t += dt;
        u += du;
        m = VelocityDistribution::maxwellian(f.grid(), mass, t, u);
    }
    for (double& v : m.values())
        v *= mo.mass;
    return m;
}

double l1_distance(const VelocityDistribution& a, const VelocityDistribution& b)
{
    if (a.grid().n != b.grid().n || a.grid().p_cap != b.grid().p_cap)
        throw DomainError("L1 distance needs identical grids");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k)
        s += std::fabs(a[k] - b[k]);
    return s * a.grid().cell_volume();
}

VelocityDistribution cell_averages(const VelocityDistribution& f)
{
    const auto& g = f.grid();
    const long n = static_cast<long>(g.n);
    VelocityDistribution out = f;
    auto at = [&](long x, long y, long z) {
        if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n)
            return 0.0;
        return f[g.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y), static_cast<std::size_t>(z))];
    };
    for (long z = 0; z < n; ++z)
        for (long y = 0; y < n; ++y)
            for (long x = 0; x < n; ++x) {
                const double c = at(x, y, z);
                const double lap = at(x - 1, y, z) + at(x + 1, y, z) + at(x, y - 1, z) + at(x, y + 1, z) +
                                   at(x, y, z - 1) + at(x, y, z + 1) - 6.0 * c;
                out.values()[g.index(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                                     static_cast<std::size_t>(z))] = c + lap / 24.0;
            }
    return out;
}

void conservation_correction(VelocityDistribution& f, const Moments& target, double mass)
{
    using Vec5 = Eigen::Matrix<double, 5, 1>;
    using Mat5 = Eigen::Matrix<double, 5, 5>;
    const auto& g = f.grid();
    const double dv = g.cell_volume();
    Vec5 want;
    want << target.mass, target.mass * target.mean_momentum.x, target.mass * target.mean_momentum.y,
        target.mass * target.mean_momentum.z, target.energy;

    std::vector<double> base = f.values();
    Vec5 lambda = Vec5::Zero();
    for (int it = 0; it < 50; ++it) {
        Vec5 got = Vec5::Zero();
        Mat5 jac = Mat5::Zero();
        for (std::size_t k = 0; k < base.size(); ++k) {
            if (base[k] == 0.0)
                continue;
            const Vec3 p = g.node(k);
            Vec5 phi;
            phi << 1.0, p.x, p.y, p.z, norm2(p) / (2.0 * mass);
            const double w = base[k] * std::exp(lambda.dot(phi)) * dv;
            got += w * phi;
            jac.noalias() += w * phi * phi.transpose();
        }
        const Vec5 r = got - want;
        // Scale each moment by its own magnitude.
        double worst = 0.0;
        for (int a = 0; a < 5; ++a) {
            const double scale = a == 0 ? target.mass : (a == 4 ? target.energy : std::sqrt(2.0 * mass * target.energy));
            worst = std::max(worst, std::fabs(r[a]) / std::max(scale, 1e-300));
        }
        if (worst < 1e-14)
            break;
        const Vec5 step = jac.ldlt().solve(r);
        if (!step.allFinite())
            throw NumericalError("conservation correction: singular moment matrix");
        lambda -= step;
        if (it == 49 && worst > 1e-9)
            throw NumericalError(fmt::format("conservation correction did not converge (residual {:.3g})", worst));
    }
    for (std::size_t k = 0; k < base.size(); ++k) {
        if (base[k] == 0.0)
            continue;
        const Vec3 p = g.node(k);
        Vec5 phi;
        phi << 1.0, p.x, p.y, p.z, norm2(p) / (2.0 * mass);
        f.values()[k] = base[k] * std::exp(lambda.dot(phi));
    }
}

double ConservationReport::worst() const
{
    return std::max({mass, std::fabs(momentum.x), std::fabs(momentum.y), std::fabs(momentum.z), energy});
}

ConservationReport conservation_errors(const VelocityDistribution& f, const std::vector<double>& rate,
                                       const std::vector<double>& flux_scale, double mass)
{
    const auto& g = f.grid();
    if (rate.size() != g.size() || flux_scale.size() != g.size())
        throw DomainError("rate vectors do not match the grid");
    double s[5] = {}, d[5] = {};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec3 p = g.node(k);
        const double phi[5] = {1.0, p.x, p.y, p.z, norm2(p) / (2.0 * mass)};
        for (int a = 0; a < 5; ++a) {
            s[a] += phi[a] * rate[k];
            d[a] += std::fabs(phi[a]) * flux_scale[k];
        }
    }
    auto rel = [](double num, double den) { return den > 0.0 ? std::fabs(num) / den : std::fabs(num); };
    ConservationReport out;
    out.mass = rel(s[0], d[0]);
    out.momentum = {rel(s[1], d[1]), rel(s[2], d[2]), rel(s[3], d[3])};
    out.energy = rel(s[4], d[4]);
    return out;
}

double marginal_l1(const VelocityDistribution& a, const VelocityDistribution& b)
{
    if (a.grid().n != b.grid().n || a.grid().p_cap != b.grid().p_cap)
        throw DomainError("marginal comparison needs identical grids");
    const auto& g = a.grid();
    const std::size_t n = g.n;
    double worst = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<double> ma(n, 0.0), mb(n, 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const std::size_t i = axis == 0 ? k % n : (axis == 1 ? (k / n) % n : k / (n * n));
            ma[i] += a[k];
            mb[i] += b[k];
        }
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += std::fabs(ma[i] - mb[i]);
        worst = std::max(worst, s * g.cell_volume());
    }
    return worst;
}

} // namespace kinetic
