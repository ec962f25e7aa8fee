// Parallel kernels against their serial references: wall time and the
// largest difference in the results.

#include "kinetic/boltzmann.hpp"
#include "kinetic/dynamics.hpp"
#include "kinetic/gradlimit.hpp"
#include "kinetic/liouville.hpp"
#include "kinetic/random.hpp"
#include "kinetic/scattering.hpp"

#include <fmt/format.h>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>

using namespace kinetic;

namespace {

template <class F>
double best_of(int reps, F&& f)
{
    double best = HUGE_VAL;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double parallel, double diff)
{
    fmt::print("{:<18} serial {:9.4f} s   parallel {:9.4f} s   speedup {:5.2f}   max diff {:.2e}\n", name, serial,
               parallel, serial / parallel, diff);
}

void bench_forces(std::size_t n)
{
    InitialDatum f0;
    const double side = std::cbrt(static_cast<double>(n) / 0.01);
    f0.domain = SpatialDomain::cube(3, side);
    f0.momentum = MomentumMixture::maxwell(1.0, 1.0);
    MdSystem sys;
    sys.domain = f0.domain;
    sys.potential = InteractionPotential::power_law(1.0, 12.0);
    sys.walls = ConfiningPotential::none();
    sys.cutoff = 5.0;
    auto rng = make_stream(1, 2, 3);
    const auto ens = sample_ensemble(f0, n, 1.0, 1.0, rng);
    std::vector<Vec3> a, b;
    const double ts = best_of(3, [&] { a = reference::forces_all_pairs(ens, sys); });
    const double tp = best_of(3, [&] { b = forces(ens, sys); });
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        diff = std::max(diff, norm(a[i] - b[i]));
    row(fmt::format("forces N={}", n).c_str(), ts, tp, diff);
}

void bench_collisions(std::size_t n, std::size_t samples)
{
    const auto mix = MomentumMixture::bimodal(1.0, 1.0, 1.5);
    const VelocityGrid vg{n, 6.0 * std::sqrt(1.0 + 1.5 * 1.5 / 3.0)};
    const auto kernel = build_kernel_table(InteractionPotential::power_law(1.0, 4.0), 1.0,
                                           KernelGrid::standard(vg.h() / 4.0, 2.0 * std::sqrt(3.0) * vg.p_cap, 128, 32));
    const auto f = VelocityDistribution::from_function(vg, [&](const Vec3& p) { return mix.density(p); });
    CollisionParams cp;
    cp.density = 0.05;
    cp.samples = samples;
    std::vector<CollisionEstimate> a, b;
    const double ts = best_of(1, [&] { a = reference::collision_rates_serial(f, kernel, cp, 0, 1e-6); });
    const double tp = best_of(1, [&] { b = collision_rates(f, kernel, cp, 0, 1e-6); });
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        diff = std::max(diff, std::fabs(a[k].mean - b[k].mean));
    row(fmt::format("collisions {}^3", n).c_str(), ts, tp, diff);
}

void bench_liouville(std::size_t n)
{
    const PhaseGrid grid{1.0, n, 6.0, n};
    const auto rho = PhaseDensity::from_function(
        grid, [](double q, double p) { return std::exp(-0.5 * std::pow((q - 0.3) / 0.05, 2) - 0.5 * p * p); });
    const auto walls = ConfiningPotential::none();
    PhaseDensity a = rho, b = rho;
    const double ts = best_of(3, [&] { a = reference::liouville_step_serial(rho, walls, 1.0, 0.01); });
    const double tp = best_of(3, [&] { b = liouville_step(rho, walls, 1.0, 0.01); });
    double diff = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k)
        diff = std::max(diff, std::fabs(a.values()[k] - b.values()[k]));
    row(fmt::format("liouville {}^2", n).c_str(), ts, tp, diff);
}

} // namespace

int main(int argc, char** argv)
{
    if (argc > 1)
        omp_set_num_threads(std::atoi(argv[1]));
    fmt::print("OpenMP threads: {}\n", omp_get_max_threads());
    bench_forces(1000);
    bench_forces(4000);
    bench_collisions(24, 300);
    bench_liouville(256);
    bench_liouville(512);
}
