#include "doctest.h"

#include "kinetic/random.hpp"
#include "kinetic/scattering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kinetic;

namespace {
constexpr double pi = std::numbers::pi;

Vec3 random_vec(std::mt19937_64& rng, double s)
{
    return {s * (2 * u01(rng) - 1), s * (2 * u01(rng) - 1), s * (2 * u01(rng) - 1)};
}
} // namespace

TEST_CASE("closest_approach")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    // head-on: Phi(r) = E_rel
    for (double g : {0.3, 1.0, 2.5}) {
        const double e = g * g / 4.0;
        CHECK(closest_approach(0.0, g, pot) == doctest::Approx(std::pow(1.0 / e, 0.25)).epsilon(1e-12));
    }
    CHECK(closest_approach(1.7, 1.0, InteractionPotential::none()) == doctest::Approx(1.7).epsilon(1e-12));
    // b = g = 1: 1 - 1/r^2 - 4/r^4 = 0 is a quadratic in x = 1/r^2
    const double x = (-1.0 + std::sqrt(17.0)) / 8.0;
    CHECK(closest_approach(1.0, 1.0, pot) == doctest::Approx(1.0 / std::sqrt(x)).epsilon(1e-12));
    CHECK_THROWS_AS(closest_approach(-0.1, 1.0, pot), DomainError);
    CHECK_THROWS_AS(closest_approach(0.5, 0.0, pot), DomainError);
}

TEST_CASE("deflection_angle limits")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    for (double g : {0.5, 1.0, 3.0}) {
        CHECK(deflection_angle(0.0, g, pot) == doctest::Approx(pi).epsilon(1e-12));
        const double d0 = std::pow(1.0 / (g * g / 4.0), 0.25);
        CHECK(deflection_angle(10.0 * d0, g, pot) < 1e-2);
    }
    const auto hs = InteractionPotential::hard_sphere(1.0);
    CHECK(deflection_angle(0.5, 1.0, hs) == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-12));
    for (double b = 0.0; b <= 1.0; b += 0.05)
        CHECK(deflection_angle(b, 1.3, hs) == doctest::Approx(2.0 * std::acos(b)).epsilon(1e-12));
}

TEST_CASE("quadrature rules agree")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    for (double b : {0.2, 0.8, 1.5, 3.0})
        CHECK(deflection_angle(b, 1.0, pot, 1.0, QuadratureRule::TanhSinh) ==
              doctest::Approx(deflection_angle(b, 1.0, pot)).epsilon(1e-8));
}

TEST_CASE("chi decreases in b and in g")
{
    const auto pot = InteractionPotential::power_law(1.0, 6.0);
    for (double g = 0.25; g < 8.0; g *= 1.7) {
        double prev = deflection_angle(0.0, g, pot);
        for (double b = 0.1; b < 4.0; b += 0.1) {
            const double c = deflection_angle(b, g, pot);
            CHECK(c < prev);
            CHECK(c >= 0.0);
            CHECK(c < deflection_angle(b, 0.9 * g, pot));
            prev = c;
        }
    }
}

TEST_CASE("post_collision_momenta special cases")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const Vec3 p{0.3, -0.2, 0.5}, p1{-0.7, 0.4, 0.1};
    const auto far = post_collision_momenta(p, p1, 1e4, 1.0, pot, 1.0);
    CHECK(max_abs(far.p - p) < 1e-12);
    CHECK(max_abs(far.p1 - p1) < 1e-12);
    for (double phi : {0.0, 1.0, 4.0}) {
        const auto back = post_collision_momenta(p, p1, 0.0, phi, pot, 1.0);
        CHECK(max_abs((back.p - back.p1) + (p - p1)) < 1e-12);
    }
    CHECK_THROWS_AS(post_collision_momenta(p, p, 0.5, 0.0, pot, 1.0), DomainError);
}

TEST_CASE("collision invariants over 10^4 random draws")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    auto rng = make_stream(42, 0, 0);
    double worst_p = 0.0, worst_g = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Vec3 p = random_vec(rng, 3.0), p1 = random_vec(rng, 3.0);
        const double b = 3.0 * u01(rng), phi = 2 * pi * u01(rng);
        const auto out = post_collision_momenta(p, p1, b, phi, pot, 1.0);
        worst_p = std::max(worst_p, max_abs((out.p + out.p1) - (p + p1)));
        worst_g = std::max(worst_g, std::fabs(norm(out.p - out.p1) - norm(p - p1)));
    }
    CHECK(worst_p < 1e-12);
    CHECK(worst_g < 1e-12);
}

TEST_CASE("rotation is undone by the reflected frame")
{
    auto rng = make_stream(43, 0, 0);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 p = random_vec(rng, 2.0), p1 = random_vec(rng, 2.0);
        const double chi = pi * u01(rng), phi = 2 * pi * u01(rng);
        const CollisionFrame f = collision_frame(p - p1);
        const Vec3 t = f.e2 * std::cos(phi) + f.e3 * std::sin(phi);
        const auto out = rotate_relative(p, p1, chi, t);
        // in the (e1, t) plane the outgoing direction is (cos chi, sin chi);
        // rotating it by chi towards (sin chi, -cos chi) lands back on e1
        const Vec3 w = f.e1 * std::sin(chi) - t * std::cos(chi);
        const auto back = rotate_relative(out.p, out.p1, chi, w);
        CHECK(max_abs(back.p - p) < 1e-9);
        CHECK(max_abs(back.p1 - p1) < 1e-9);
    }
}

TEST_CASE("collision_frame is orthonormal")
{
    auto rng = make_stream(44, 0, 0);
    for (int k = 0; k < 200; ++k) {
        const Vec3 d = random_vec(rng, 1.0);
        const auto f = collision_frame(d);
        CHECK(std::fabs(dot(f.e1, f.e2)) < 1e-14);
        CHECK(std::fabs(dot(f.e1, f.e3)) < 1e-14);
        CHECK(std::fabs(dot(f.e2, f.e3)) < 1e-14);
        CHECK(norm(f.e2) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(max_abs(f.e1 - d / norm(d)) < 1e-15);
    }
}

TEST_CASE("b_max_for")
{
    const auto hs = InteractionPotential::hard_sphere(1.3);
    CHECK(b_max_for(hs, 1.0, 1e-6) == doctest::Approx(1.3).epsilon(1e-6));
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    CHECK(b_max_for(pot, 1.0, pi) < 1e-6);
    const double b = b_max_for(pot, 1.0, 1e-2);
    CHECK(deflection_angle(b, 1.0, pot) <= 1e-2);
    CHECK(deflection_angle(0.999 * b, 1.0, pot) > 1e-2);
    CHECK_THROWS_AS(b_max_for(pot, 1.0, 0.0), DomainError);
}

TEST_CASE("kernel table: single node reproduces the quadrature")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    KernelGrid grid{{0.5}, {1.0}};
    const auto k = build_kernel_table(pot, 1.0, grid);
    const double b = 0.5 * k.b_max(1.0);
    CHECK(k.chi(b, 1.0) == doctest::Approx(deflection_angle(b, 1.0, pot)).epsilon(1e-14));
}

TEST_CASE("kernel table: monotone rows and midpoint accuracy")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    double reported = -1.0;
    const auto k = build_kernel_table(pot, 1.0, KernelGrid::standard(0.05, 20.0, 256, 64), 1e-2, 100, &reported);
    CHECK(reported >= 0.0);
    CHECK(reported < 1e-3);
    const auto& x = k.reduced_b();
    const auto& g = k.g_grid();
    for (std::size_t ig = 0; ig < g.size(); ++ig)
        for (std::size_t ib = 1; ib < x.size(); ++ib)
            CHECK(k.chi_at(ib, ig) <= k.chi_at(ib - 1, ig));

    // independent midpoint check at 100 random cells
    auto rng = make_stream(45, 0, 0);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        const std::size_t ig = static_cast<std::size_t>(u01(rng) * (g.size() - 1));
        const std::size_t ib = static_cast<std::size_t>(u01(rng) * (x.size() - 1));
        const double gm = std::sqrt(g[ig] * g[ig + 1]);
        const double bm = 0.5 * (x[ib] + x[ib + 1]) * k.b_max(gm);
        worst = std::max(worst, std::fabs(k.chi(bm, gm) - deflection_angle(bm, gm, pot)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("kernel table CSV round trip")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const auto k = build_kernel_table(pot, 1.0, KernelGrid::standard(0.1, 10.0, 16, 8));
    std::stringstream ss;
    k.write_csv(ss);
    const auto r = ScatteringKernel::read_csv(ss);
    CHECK(r.table() == k.table());
    CHECK(r.g_grid() == k.g_grid());
    CHECK(r.reduced_b() == k.reduced_b());
    CHECK(r.chi(0.7, 1.3) == k.chi(0.7, 1.3));
    std::stringstream bad("garbage\n1,2,3\n");
    CHECK_THROWS_AS(ScatteringKernel::read_csv(bad), InputError);
}
