#include "doctest.h"

#include "kinetic/core.hpp"
#include "kinetic/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace kinetic;

namespace {

ParticleEnsemble random_ensemble(std::size_t n, double side, std::uint64_t seed)
{
    auto rng = make_stream(seed, 1, 2);
    ParticleEnsemble ens;
    for (std::size_t i = 0; i < n; ++i) {
        ens.positions.push_back({side * (0.1 + 0.8 * u01(rng)), side * (0.1 + 0.8 * u01(rng)),
                                 side * (0.1 + 0.8 * u01(rng))});
        ens.momenta.push_back({u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5});
    }
    return ens;
}

} // namespace

TEST_CASE("potential_value")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    CHECK(potential_value(pot, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(potential_value(InteractionPotential::power_law(2.0, 3.0), 2.0) == doctest::Approx(2.0 / 8.0));
    double prev = potential_value(pot, 1.0);
    for (double r = 2.0; r < 1e6; r *= 2.0) {
        const double v = potential_value(pot, r);
        CHECK(v < prev);
        CHECK(v > 0.0);
        prev = v;
    }
    CHECK(prev < 1e-20);
    CHECK_THROWS_AS(potential_value(pot, 0.0), DomainError);
    CHECK_THROWS_AS(potential_value(pot, -1.0), DomainError);
}

TEST_CASE("potential monotone over random pairs")
{
    auto rng = make_stream(7, 0, 0);
    const auto pot = InteractionPotential::power_law(1.3, 6.0, 0.5);
    for (int k = 0; k < 1000; ++k) {
        double a = 0.01 + 10.0 * u01(rng), b = 0.01 + 10.0 * u01(rng);
        if (a == b)
            continue;
        if (a > b)
            std::swap(a, b);
        CHECK(potential_value(pot, a) > potential_value(pot, b));
    }
}

TEST_CASE("hamiltonian examples")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const auto none = ConfiningPotential::none();

    ParticleEnsemble one;
    one.positions = {{0.5, 0.5, 0.5}};
    one.momenta = {{0, 0, 0}};
    CHECK(hamiltonian(one, pot, none) == 0.0);

    ParticleEnsemble two;
    two.positions = {{1, 1, 1}, {9, 1, 1}};
    two.momenta = {{0, 0, 0}, {0, 0, 0}};
    CHECK(hamiltonian(two, pot, none) <= std::pow(8.0, -4.0) * (1 + 1e-12));

    // three particles: pairwise sum by hand
    ParticleEnsemble three = random_ensemble(3, 4.0, 11);
    three.mass = 1.7;
    const auto p2 = InteractionPotential::power_law(0.8, 6.0, 0.9);
    double expect = 0.0;
    for (const auto& p : three.momenta)
        expect += (p.x * p.x + p.y * p.y + p.z * p.z) / (2.0 * three.mass);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const Vec3 d = three.positions[i] - three.positions[j];
            const double r = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
            expect += 0.8 * std::pow(r / 0.9, -6.0);
        }
    CHECK(hamiltonian(three, p2, none) == doctest::Approx(expect).epsilon(1e-13));

    ParticleEnsemble clash;
    clash.positions = {{1, 1, 1}, {1, 1, 1}};
    clash.momenta = {{0, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(hamiltonian(clash, pot, none), SingularityError);
}

TEST_CASE("hamiltonian relabeling and parity are exact")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0, 0.3);
    const SpatialDomain dom = SpatialDomain::cube(3, 5.0);
    const auto walls = ConfiningPotential::soft_walls(dom, 1e-3);
    std::mt19937_64 perm_rng(3);
    for (std::uint64_t s = 0; s < 20; ++s) {
        ParticleEnsemble ens = random_ensemble(30, 5.0, s);
        const double h = hamiltonian(ens, pot, walls);

        std::vector<std::size_t> idx(ens.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), perm_rng);
        ParticleEnsemble perm = ens;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            perm.positions[i] = ens.positions[idx[i]];
            perm.momenta[i] = ens.momenta[idx[i]];
        }
        CHECK(hamiltonian(perm, pot, walls) == h);

        ParticleEnsemble flipped = ens;
        for (auto& p : flipped.momenta)
            p = -p;
        CHECK(hamiltonian(flipped, pot, walls) == h);
    }
}

TEST_CASE("maxwell_density")
{
    const double m = 1.3, T = 0.7;
    const Vec3 mean{0.2, -0.1, 0.4};
    // 3-D midpoint quadrature over +-8 sigma
    const double s = std::sqrt(m * T), lo = -8.0 * s, h = 16.0 * s / 64.0;
    double mass = 0.0, second = 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            for (int k = 0; k < 64; ++k) {
                const Vec3 d{lo + (i + 0.5) * h, lo + (j + 0.5) * h, lo + (k + 0.5) * h};
                const double w = maxwell_density(mean + d, m, T, mean) * h * h * h;
                mass += w;
                second += w * (d.x * d.x + d.y * d.y + d.z * d.z);
            }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(second == doctest::Approx(3.0 * m * T).epsilon(1e-6));

    const double peak = maxwell_density(mean, m, T, mean);
    auto rng = make_stream(5, 0, 0);
    for (int k = 0; k < 200; ++k) {
        const Vec3 p = mean + Vec3{u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5};
        CHECK(maxwell_density(p, m, T, mean) <= peak);
    }
    CHECK_THROWS_AS(maxwell_density(mean, m, 0.0, mean), DomainError);
    CHECK_THROWS_AS(maxwell_density(0.0, m, -1.0, 0.0), DomainError);
}

TEST_CASE("density_from_confidence")
{
    const auto g = density_from_confidence({0.0, 3.0, 0.997});
    CHECK(g.mean == 0.0);
    CHECK(g.sigma == doctest::Approx(1.0).epsilon(1e-15));
    const auto g2 = density_from_confidence({5.0, 1.0, 0.683});
    CHECK(g2.mean == 5.0);
    CHECK(g2.sigma == doctest::Approx(1.0).epsilon(1e-15));

    // arbitrary levels round-trip through erf
    for (double level : {0.5, 0.8, 0.9, 0.95, 0.99, 0.9999}) {
        const auto d = density_from_confidence({1.0, 2.0, level});
        const double mass = std::erf(2.0 / (d.sigma * std::sqrt(2.0)));
        CHECK(std::fabs(mass - level) < 1e-6);
        CHECK(std::fabs(d.mass_between(-1.0, 3.0) - level) < 1e-6);
    }
    CHECK_THROWS_AS(density_from_confidence({0.0, 0.0, 0.997}), DomainError);
    CHECK_THROWS_AS(density_from_confidence({0.0, -1.0, 0.9}), DomainError);
}

TEST_CASE("domain and ensemble validation")
{
    const SpatialDomain d = SpatialDomain::cube(3, 2.0);
    CHECK(d.volume() == doctest::Approx(8.0));
    CHECK(d.contains({1, 1, 1}));
    CHECK_FALSE(d.contains({3, 1, 1}));
    ParticleEnsemble ens;
    ens.positions = {{3, 1, 1}};
    ens.momenta = {{0, 0, 0}};
    CHECK_THROWS_AS(ens.validate(d), Error);
}
