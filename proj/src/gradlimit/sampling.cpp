#include "kinetic/gradlimit.hpp"

#include "kinetic/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace kinetic {

ScalingConfig ScalingConfig::geometric(std::size_t n0, double mu0, std::size_t rungs, std::size_t runs)
{
    ScalingConfig cfg;
    cfg.kappa = static_cast<double>(n0) * mu0 * mu0;
    cfg.runs = runs;
    std::size_t n = n0;
    double mu = mu0;
    for (std::size_t k = 0; k < rungs; ++k) {
        cfg.ladder.push_back({n, mu});
        n *= 4;
        mu *= 0.5;
    }
    return cfg;
}

void ScalingConfig::validate() const
{
    if (!(kappa > 0.0))
        throw DomainError("scaling: kappa = N mu^2 must be positive");
    if (ladder.empty())
        throw DomainError("scaling: empty ladder");
    if (runs < 1)
        throw DomainError("scaling: need at least one run per rung");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        const Rung& r = ladder[k];
        if (r.particles < 2 || !(r.mu > 0.0))
            throw DomainError(fmt::format("scaling: rung {} needs N >= 2 and mu > 0", k));
        const double kk = static_cast<double>(r.particles) * r.mu * r.mu;
        if (std::fabs(kk - kappa) > 1e-12 * kappa)
            throw DomainError(fmt::format("scaling: rung {} has N mu^2 = {:.17g}, expected {:.17g}", k, kk, kappa));
        if (k > 0 && !(r.particles > ladder[k - 1].particles && r.mu < ladder[k - 1].mu))
            throw DomainError(fmt::format("scaling: rung {} must raise N and lower mu", k));
    }
}

MomentumMixture MomentumMixture::maxwell(double mass, double temperature)
{
    MomentumMixture m;
    m.mass = mass;
    m.components.push_back({1.0, {}, temperature});
    return m;
}

MomentumMixture MomentumMixture::bimodal(double mass, double temperature, double delta)
{
    MomentumMixture m;
    m.mass = mass;
    m.components.push_back({0.5, {delta, 0.0, 0.0}, temperature});
    m.components.push_back({0.5, {-delta, 0.0, 0.0}, temperature});
    return m;
}

void MomentumMixture::validate() const
{
    if (components.empty())
        throw DomainError("momentum mixture has no components");
    if (!(mass > 0.0))
        throw DomainError("momentum mixture needs m > 0");
    double w = 0.0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || !(c.temperature > 0.0))
            throw DomainError("mixture components need positive weight and temperature");
        w += c.weight;
    }
    if (std::fabs(w - 1.0) > 1e-12)
        throw DomainError("mixture weights must sum to 1");
}

double MomentumMixture::density(const Vec3& p) const
{
    double s = 0.0;
    for (const auto& c : components)
        s += c.weight * maxwell_density(p, mass, c.temperature, c.mean);
    return s;
}

double MomentumMixture::box_probability(const Vec3& lo, const Vec3& hi) const
{
    double s = 0.0;
    for (const auto& c : components) {
        double prod = c.weight;
        for (int a = 0; a < 3; ++a)
            prod *= GaussianDensity{c.mean[a], std::sqrt(mass * c.temperature)}.mass_between(lo[a], hi[a]);
        s += prod;
    }
    return s;
}

Vec3 MomentumMixture::sample(std::mt19937_64& rng) const
{
    double u = u01(rng);
    const Component* pick = &components.back();
    for (const auto& c : components) {
        if (u < c.weight) {
            pick = &c;
            break;
        }
        u -= c.weight;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(mass * pick->temperature));
    Vec3 p = pick->mean;
    for (int a = 0; a < 3; ++a)
        p[a] += normal(rng);
    return p;
}

double MomentumMixture::mean_speed() const
{
    // Mean norm of a shifted isotropic Gaussian (noncentral chi, 3 dof).
    double s = 0.0;
    for (const auto& c : components) {
        const double sigma = std::sqrt(mass * c.temperature);
        const double lam = norm(c.mean) / sigma;
        double e;
        if (lam < 1e-6)
            e = 2.0 * std::sqrt(2.0 / std::numbers::pi);
        else
            e = std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * lam * lam) +
                (lam + 1.0 / lam) * std::erf(lam / std::numbers::sqrt2);
        s += c.weight * sigma * e;
    }
    return s / mass;
}

void InitialDatum::validate() const
{
    domain.validate();
    momentum.validate();
    if (!spatial.empty() && static_cast<int>(spatial.size()) != domain.dimension)
        throw DomainError("spatial profile needs one Gaussian per active axis");
    for (const auto& g : spatial)
        if (!(g.sigma > 0.0))
            throw DomainError("spatial profile needs sigma > 0");
}

double InitialDatum::spatial_density(const Vec3& q) const
{
    if (!domain.contains(q))
        return 0.0;
    if (spatial.empty())
        return 1.0 / domain.volume();
    double d = 1.0;
    for (int a = 0; a < domain.dimension; ++a)
        d *= spatial[a](q[a]) / spatial[a].mass_between(0.0, domain.lengths[a]);
    return d;
}

namespace {

Vec3 sample_position(const InitialDatum& f0, std::mt19937_64& rng)
{
    Vec3 q{};
    for (int a = 0; a < f0.domain.dimension; ++a) {
        const double L = f0.domain.lengths[a];
        if (f0.spatial.empty()) {
            q[a] = L * u01(rng);
            continue;
        }
        std::normal_distribution<double> normal(f0.spatial[a].mean, f0.spatial[a].sigma);
        double x;
        do
            x = normal(rng);
        while (!(x > 0.0 && x < L));
        q[a] = x;
    }
    return q;
}

} // namespace

ParticleEnsemble sample_ensemble(const InitialDatum& f0, std::size_t n, double mu, double mass, std::mt19937_64& rng,
                                 SamplingStats* stats)
{
    f0.validate();
    if (n < 2)
        throw DomainError("sample_ensemble needs N >= 2");
    if (!(mu > 0.0) || !(mass > 0.0))
        throw DomainError("sample_ensemble needs mu > 0 and m > 0");
    const double excl = 3.0 * mu;
    const int dim = f0.domain.dimension;
    // Hash grid with cells of the exclusion radius: neighbors within 3 mu
    // sit in the adjacent cells.
    auto key = [&](const Vec3& q) {
        std::uint64_t k = 0;
        for (int a = 0; a < 3; ++a)
            k = k * 0x100000ULL + static_cast<std::uint64_t>(std::floor(q[a] / excl) + 0x80000);
        return k;
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
    ParticleEnsemble ens;
    ens.mass = mass;
    ens.positions.reserve(n);
    ens.momenta.reserve(n);
    SamplingStats st;
    const double scale = mass / f0.momentum.mass; // momenta follow the requested mass
    while (ens.positions.size() < n) {
        const Vec3 q = sample_position(f0, rng);
        ++st.attempts;
        bool clash = false;
        for (int dz = (dim > 2 ? -1 : 0); dz <= (dim > 2 ? 1 : 0) && !clash; ++dz)
            for (int dy = (dim > 1 ? -1 : 0); dy <= (dim > 1 ? 1 : 0) && !clash; ++dy)
                for (int dx = -1; dx <= 1 && !clash; ++dx) {
                    const Vec3 shifted{q.x + dx * excl, q.y + dy * excl, q.z + dz * excl};
                    const auto it = grid.find(key(shifted));
                    if (it == grid.end())
                        continue;
                    for (std::uint32_t j : it->second)
                        if (norm(ens.positions[j] - q) < excl) {
                            clash = true;
                            break;
                        }
                }
        if (clash) {
            ++st.rejected;
            if (st.attempts >= 1000 && st.rejected * 100 > st.attempts * 99)
                throw FeasibilityError(fmt::format("sample_ensemble: {} of {} draws rejected placing {} particles "
                                                   "at 3 mu = {:.3g}; the box is too small",
                                                   st.rejected, st.attempts, n, excl));
            continue;
        }
        grid[key(q)].push_back(static_cast<std::uint32_t>(ens.positions.size()));
        ens.positions.push_back(q);
        Vec3 p = f0.momentum.sample(rng) * scale;
        for (int a = dim; a < 3; ++a)
            p[a] = 0.0;
        ens.momenta.push_back(p);
    }
    if (stats)
        *stats = st;
    return ens;
}

RescaledParticle rescale_masses(double mass, const InteractionPotential& pot, double mu)
{
    if (!(mu > 0.0))
        throw DomainError("rescale_masses needs mu > 0");
    RescaledParticle r{mass * mu * mu, pot};
    r.potential.coefficient = pot.coefficient * mu * mu;
    return r;
}

MicroCoordinates rescale_coordinates(const Vec3& q, double t, double mu)
{
    if (!(mu > 0.0))
        throw DomainError("rescale_coordinates needs mu > 0");
    return {q / mu, t / mu};
}

} // namespace kinetic
