#include "doctest.h"

#include "kinetic/gradlimit.hpp"
#include "kinetic/random.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace kinetic;

namespace {

InitialDatum uniform_datum(double side, double T = 1.0)
{
    InitialDatum f0;
    f0.domain = SpatialDomain::cube(3, side);
    f0.momentum = MomentumMixture::maxwell(1.0, T);
    return f0;
}

std::vector<ParticleEnsemble> iid_runs(std::size_t runs, std::size_t n, std::uint64_t seed, double side = 10.0)
{
    const auto f0 = uniform_datum(side);
    std::vector<ParticleEnsemble> out;
    for (std::size_t r = 0; r < runs; ++r) {
        auto rng = make_stream(seed, r, 0);
        out.push_back(sample_ensemble(f0, n, 1e-3, 1.0, rng));
    }
    return out;
}

double chi2_critical(std::size_t df, double level)
{
    return boost::math::quantile(boost::math::chi_squared(static_cast<double>(df)), level);
}

} // namespace

TEST_CASE("geometric ladder keeps N mu^2 fixed")
{
    const auto s = ScalingConfig::geometric(250, 2.0, 3, 32);
    REQUIRE(s.ladder.size() == 3);
    CHECK(s.ladder[0].particles == 250);
    CHECK(s.ladder[1].particles == 1000);
    CHECK(s.ladder[2].particles == 4000);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& r = s.ladder[k];
        CHECK(std::fabs(r.particles * r.mu * r.mu - s.kappa) <= 1e-12 * s.kappa);
        if (k > 0) {
            CHECK(r.particles > s.ladder[k - 1].particles);
            CHECK(r.mu < s.ladder[k - 1].mu);
        }
    }
    s.validate();
    ScalingConfig bad = s;
    bad.ladder[1].mu *= 1.01;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("sample_ensemble: two particles obey the exclusion")
{
    const auto f0 = uniform_datum(5.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto rng = make_stream(s, 0, 0);
        const auto e = sample_ensemble(f0, 2, 0.5, 1.0, rng);
        CHECK(f0.domain.contains(e.positions[0]));
        CHECK(f0.domain.contains(e.positions[1]));
        CHECK(norm(e.positions[0] - e.positions[1]) >= 1.5);
    }
    auto rng = make_stream(1, 0, 0);
    CHECK_THROWS_AS(sample_ensemble(f0, 1, 0.5, 1.0, rng), DomainError);
    CHECK_THROWS_AS(sample_ensemble(f0, 500, 1.0, 1.0, rng), FeasibilityError);
}

TEST_CASE("sample_ensemble marginals pass a chi-square test")
{
    InitialDatum f0 = uniform_datum(10.0);
    f0.momentum = MomentumMixture::bimodal(1.0, 1.0, 1.5);
    auto rng = make_stream(2, 0, 0);
    const std::size_t n = 100000;
    const auto e = sample_ensemble(f0, n, 1e-3, 1.0, rng);

    // q_x: 20 equal cells
    std::vector<double> cq(20, 0.0);
    for (const auto& q : e.positions)
        cq[std::min<std::size_t>(19, static_cast<std::size_t>(q.x / 0.5))] += 1.0;
    double chi2 = 0.0;
    for (double c : cq)
        chi2 += (c - n / 20.0) * (c - n / 20.0) / (n / 20.0);
    CHECK(chi2 < chi2_critical(19, 0.99));

    // p_x: 24 cells on [-6, 6] plus the two tails, expected counts from erf
    std::vector<double> cp(26, 0.0);
    for (const auto& p : e.momenta) {
        const double x = (p.x + 6.0) / 0.5;
        cp[x < 0 ? 0 : (x >= 24 ? 25 : 1 + static_cast<std::size_t>(x))] += 1.0;
    }
    auto prob = [&](double lo, double hi) {
        return f0.momentum.box_probability({lo, -1e3, -1e3}, {hi, 1e3, 1e3});
    };
    chi2 = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < 26; ++k) {
        const double lo = k == 0 ? -1e3 : -6.0 + 0.5 * (k - 1);
        const double hi = k == 0 ? -6.0 : (k == 25 ? 1e3 : lo + 0.5);
        const double expect = n * prob(lo, hi);
        if (expect < 5.0)
            continue;
        chi2 += (cp[k] - expect) * (cp[k] - expect) / expect;
        ++used;
    }
    CHECK(chi2 < chi2_critical(used - 1, 0.99));
}

TEST_CASE("rejection rate and interaction energy vanish with mu")
{
    // at fixed N the excluded volume and the pair energy both shrink with mu;
    // interaction / kinetic goes like n mu^3
    const auto f0 = uniform_datum(10.0);
    double prev_rate = 1.0, prev_ratio = HUGE_VAL, last_ratio = 0.0;
    for (double mu : {0.4, 0.2, 0.1, 0.02}) {
        auto rng = make_stream(3, 0, 0);
        SamplingStats st;
        const auto e = sample_ensemble(f0, 400, mu, 1.0, rng, &st);
        CHECK(st.rejection_rate() <= prev_rate);
        prev_rate = st.rejection_rate();
        const auto pot = InteractionPotential::power_law(1.0, 4.0, mu);
        const double kin = kinetic_energy(e);
        const double ratio = (hamiltonian(e, pot, ConfiningPotential::none()) - kin) / kin;
        CHECK(ratio < prev_ratio);
        prev_ratio = last_ratio = ratio;
    }
    CHECK(prev_rate < 1e-3);
    CHECK(last_ratio < 1e-3);
}

TEST_CASE("MomentumMixture")
{
    const auto mix = MomentumMixture::bimodal(1.3, 0.7, 1.2);
    CHECK(mix.box_probability({-50, -50, -50}, {50, 50, 50}) == doctest::Approx(1.0).epsilon(1e-12));
    auto rng = make_stream(4, 0, 0);
    double s = 0.0;
    const int n = 400000;
    for (int k = 0; k < n; ++k)
        s += norm(mix.sample(rng)) / 1.3;
    CHECK(s / n == doctest::Approx(mix.mean_speed()).epsilon(3e-3));
    // density integrates to one (midpoint rule on a wide cube)
    double mass = 0.0;
    const double h = 0.25;
    for (double x = -8 + h / 2; x < 8; x += h)
        for (double y = -8 + h / 2; y < 8; y += h)
            for (double z = -8 + h / 2; z < 8; z += h)
                mass += mix.density({x, y, z}) * h * h * h;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("empirical_f1 convention and pooling")
{
    const auto runs = iid_runs(2, 20000, 5);
    PhaseBins bins;
    bins.domain = SpatialDomain::cube(3, 10.0);
    bins.q_bins = {4, 1, 1};
    bins.p_bins = {4, 4, 1};
    bins.p_cap = 4.0;
    const auto f1 = empirical_f1(std::span(runs.data(), 1), bins);
    CHECK(f1.samples() == 20000);
    const auto dens = f1.density();
    double integral = 0.0;
    for (double d : dens)
        integral += d * bins.cell_volume();
    const auto probs = f1.probabilities();
    // the last entry is the overflow cell (momenta beyond the cap)
    REQUIRE(probs.size() == bins.size() + 1);
    const double inside = std::accumulate(probs.begin(), probs.end() - 1, 0.0);
    CHECK(integral == doctest::Approx(1000.0 * inside).epsilon(1e-12));

    // flat in q: each q slab holds a quarter within Poisson noise
    std::vector<double> slab(4, 0.0);
    for (std::size_t c = 0; c < bins.size(); ++c)
        slab[static_cast<std::size_t>(bins.q_center(c).x / 2.5)] += probs[c];
    for (double s : slab)
        CHECK(std::fabs(s - 0.25 * inside) < 4.0 * std::sqrt(0.25 * 0.75 / 20000.0));

    // a run pooled with itself: same probabilities, twice the counts
    const std::vector<ParticleEnsemble> twice{runs[0], runs[0]};
    const auto f2 = empirical_f1(twice, bins);
    CHECK(f2.probabilities() == probs);
    CHECK(f2.samples() == 2 * f1.samples());

    std::vector<ParticleEnsemble> mixed{runs[0], iid_runs(1, 10, 9)[0]};
    CHECK_THROWS_AS(empirical_f1(mixed, bins), InputError);
}

TEST_CASE("sampled f1 recovers the datum")
{
    InitialDatum f0 = uniform_datum(10.0);
    f0.momentum = MomentumMixture::bimodal(1.0, 1.0, 1.5);
    PhaseBins bins;
    bins.domain = f0.domain;
    bins.p_bins = {8, 8, 8};
    bins.p_cap = 6.0;
    auto rng = make_stream(6, 0, 0);
    const std::vector<ParticleEnsemble> runs{sample_ensemble(f0, 100000, 1e-3, 1.0, rng)};
    const auto ref = reference_probabilities(bins, f0);
    const double d = probability_l1(empirical_f1(runs, bins).probabilities(), ref);
    const auto floor = histogram_noise_floor(ref, 100000, 0, 200, 7);
    CHECK(std::fabs(d - floor.mean) < 3.0 * floor.sd + 1e-3);
}

TEST_CASE("histogram noise floor matches the normal approximation")
{
    std::vector<double> p(50, 1.0 / 50.0);
    const std::uint64_t n = 200000;
    const auto fl = histogram_noise_floor(p, n, 0, 400, 8);
    double expect = 0.0;
    for (double q : p)
        expect += std::sqrt(2.0 * q * (1.0 - q) / (std::numbers::pi * n));
    CHECK(fl.mean == doctest::Approx(expect).epsilon(0.03));
}

TEST_CASE("exchangeability: permuting particles changes nothing")
{
    auto runs = iid_runs(4, 300, 10);
    PhaseBins bins;
    bins.domain = SpatialDomain::cube(3, 10.0);
    bins.q_bins = {2, 1, 1};
    FactorizationConfig fc;
    fc.bins_per_axis = 4;
    fc.bootstrap = 20;
    const auto f1 = empirical_f1(runs, bins);
    const auto fe = factorization_error(runs, bins.domain, fc);
    std::mt19937_64 rng(3);
    for (auto& r : runs) {
        std::vector<std::size_t> idx(r.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        ParticleEnsemble p = r;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            p.positions[i] = r.positions[idx[i]];
            p.momenta[i] = r.momenta[idx[i]];
        }
        r = p;
    }
    CHECK(empirical_f1(runs, bins).counts() == f1.counts());
    const auto fp = factorization_error(runs, bins.domain, fc);
    CHECK(fp.raw == fe.raw);
    CHECK(fp.value == fe.value);
    CHECK(fp.ci_low == fe.ci_low);
    CHECK(fp.ci_high == fe.ci_high);
}

TEST_CASE("factorization: independent vs pairwise duplicated")
{
    const auto runs = iid_runs(16, 400, 11);
    const SpatialDomain dom = SpatialDomain::cube(3, 10.0);
    FactorizationConfig fc;
    fc.bins_per_axis = 4;
    fc.bootstrap = 100;
    const auto iid = factorization_error(runs, dom, fc);
    CHECK(iid.ci_low <= 0.0);
    CHECK(iid.ci_high >= 0.0);

    auto dup = runs;
    for (auto& r : dup)
        for (std::size_t i = 1; i < r.size(); i += 2) {
            r.positions[i] = r.positions[i - 1];
            r.momenta[i] = r.momenta[i - 1];
        }
    const auto d = factorization_error(dup, dom, fc);
    CHECK(d.ci_low > 0.0);
    CHECK(d.value > iid.value);

    FactorizationConfig fine = fc;
    fine.bins_per_axis = 64;
    const std::vector<ParticleEnsemble> few(runs.begin(), runs.begin() + 1);
    CHECK_THROWS_AS(factorization_error(few, dom, fine), ResolutionError);
}

TEST_CASE("rescale_masses and rescale_coordinates")
{
    const auto pot = InteractionPotential::power_law(2.0, 4.0);
    const auto id = rescale_masses(1.5, pot, 1.0);
    CHECK(id.mass == 1.5);
    CHECK(id.potential.pair_energy(0.7) == pot.pair_energy(0.7));
    const auto half = rescale_masses(1.0, pot, 0.5);
    CHECK(half.mass == doctest::Approx(0.25));
    for (double r : {0.5, 1.0, 2.0})
        CHECK(half.potential.pair_energy(r) == doctest::Approx(0.25 * pot.pair_energy(r)).epsilon(1e-14));

    // joint rescaling leaves E_rel / Phi, hence chi, unchanged at fixed g
    for (double b : {0.0, 0.5, 1.2})
        for (double g : {0.5, 2.0})
            CHECK(deflection_angle(b, g, half.potential, half.mass) ==
                  doctest::Approx(deflection_angle(b, g, pot, 1.0)).epsilon(1e-10));

    const auto c = rescale_coordinates({1, 1, 1}, 1.0, 0.01);
    CHECK(c.xi.x == doctest::Approx(100.0));
    CHECK(c.tau == doctest::Approx(100.0));
    const auto c1 = rescale_coordinates({0.3, 0.2, 0.1}, 4.0, 1.0);
    CHECK(c1.xi == Vec3{0.3, 0.2, 0.1});
    CHECK(c1.tau == 4.0);
    CHECK_THROWS_AS(rescale_coordinates({1, 1, 1}, 1.0, 0.0), DomainError);
}

TEST_CASE("two-body flow: rescaled dynamics, reversal and release")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const PairState s{{0, 0, 0}, {0.8, 0.05, 0}, {4, 0.5, 0}, {-0.8, 0, 0.02}};
    const auto a = two_body_flow(s, pot, 1.0, 8.0, 1e-3);

    // mass mu^2 m, potential mu^2 Phi, momenta mu^2 p: same positions
    const double mu = 0.5;
    const auto r = rescale_masses(1.0, pot, mu);
    const PairState sr{s.q1, s.p1 * (mu * mu), s.q2, s.p2 * (mu * mu)};
    const auto b = two_body_flow(sr, r.potential, r.mass, 8.0, 1e-3);
    CHECK(max_abs(a.q1 - b.q1) < 1e-9);
    CHECK(max_abs(a.q2 - b.q2) < 1e-9);
    CHECK(max_abs(a.p1 * (mu * mu) - b.p1) < 1e-9);

    const auto back = two_body_flow(a, pot, 1.0, -8.0, 1e-3);
    CHECK(max_abs(back.q1 - s.q1) < 1e-9);
    CHECK(max_abs(back.p2 - s.p2) < 1e-9);

    // releasing a receding pair far out changes the result by the tail only
    const auto rel = two_body_flow(s, pot, 1.0, 30.0, 1e-3, 8.0);
    const auto full = two_body_flow(s, pot, 1.0, 30.0, 1e-3);
    CHECK(max_abs(rel.p1 - full.p1) < 1e-3);
    CHECK(max_abs(rel.q1 - full.q1) < 1e-2);
}

TEST_CASE("mean free path and time agree")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const auto kernel = build_kernel_table(pot, 1.0, KernelGrid::standard(0.02, 40.0, 128, 64));
    const auto mix = MomentumMixture::bimodal(1.0, 1.0, 1.5);
    const double kappa = 250.0, ell = 2.0;
    const double side = cube_side_for_mean_free_path(kernel, mix, kappa, ell);
    const double n = kappa / (side * side * side);
    const double u = mix.mean_speed();
    CHECK(mean_free_time(kernel, n, u, 1.0) * u == doctest::Approx(ell).epsilon(1e-10));
    const double bm = kernel.b_max(u);
    CHECK(kappa * std::numbers::pi * bm * bm * ell == doctest::Approx(side * side * side).epsilon(1e-10));
}

TEST_CASE("trend_test")
{
    CHECK(trend_test({0.3, 0.2, 0.1}, {0.01, 0.01, 0.01}, 0.95).decreasing);
    CHECK_FALSE(trend_test({0.3, 0.29, 0.28}, {0.05, 0.05, 0.05}, 0.95).decreasing);
    CHECK_FALSE(trend_test({0.1, 0.2, 0.05}, {0.01, 0.01, 0.01}, 0.95).decreasing);
    CHECK_THROWS_AS(trend_test({0.1}, {0.01}, 0.95), InputError);
}

TEST_CASE("sweep sanity: t = 0 sits at the noise floor, control stays flat")
{
    const auto pot = InteractionPotential::power_law(1.0, 4.0);
    const auto kernel = build_kernel_table(pot, 1.0, KernelGrid::standard(0.02, 40.0, 128, 64));
    const auto cfg = ScalingConfig::geometric(40, 1.0, 2, 8);
    InitialDatum f0;
    f0.domain = SpatialDomain::cube(3, 20.0);
    f0.momentum = MomentumMixture::bimodal(1.0, 1.0, 1.5);
    SweepOptions opt;
    opt.checkpoints = {0.0, 0.2};
    opt.dtau = 0.05;
    opt.bins.domain = f0.domain;
    opt.bins.p_bins = {4, 4, 1};
    opt.factorization.bins_per_axis = 2;
    opt.factorization.bootstrap = 20;
    opt.reference_particles = 20000;
    opt.bootstrap = 50;
    opt.floor_replicates = 50;
    const auto rep = scaling_sweep(cfg, f0, pot, kernel, opt);
    REQUIRE(rep.rungs.size() == 2);
    CHECK(rep.kappa == doctest::Approx(40.0));
    for (const auto& r : rep.rungs) {
        const auto& c0 = r.checkpoints.front();
        CHECK(c0.t == 0.0);
        CHECK(c0.excess_low <= 0.0);
        CHECK(c0.excess_high >= 0.0);
    }
    CHECK(rep.rungs[1].initial_interaction_ratio < rep.rungs[0].initial_interaction_ratio);
    opt.collisionless = true;
    const auto ctl = scaling_sweep(cfg, f0, pot, kernel, opt);
    for (const auto& r : ctl.rungs)
        for (const auto& c : r.checkpoints) {
            CHECK(c.excess_low <= 0.0);
            CHECK(c.excess_high >= 0.0);
        }
}
