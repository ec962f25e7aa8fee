#include "kinetic/boltzmann.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace kinetic {

namespace {

struct Rule {
    std::vector<double> x; // on [0, 1]
    std::vector<double> w; // sums to 1
};

Rule gauss_unit(std::size_t n)
{
    Rule r;
    const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
    std::vector<double> all;
    for (double z : zeros) {
        all.push_back(z);
        if (z != 0.0)
            all.push_back(-z);
    }
    std::sort(all.begin(), all.end());
    for (double z : all) {
        const double d = boost::math::legendre_p_prime(static_cast<int>(n), z);
        r.x.push_back(0.5 * (z + 1.0));
        r.w.push_back(1.0 / ((1.0 - z * z) * d * d)); // 2/((1-z^2)P'^2), halved for [0, 1]
    }
    return r;
}

void check(const QuadratureConfig& cfg)
{
    if (cfg.b_nodes < 1 || cfg.phi_nodes < 1)
        throw DomainError("quadrature needs at least one node per axis");
    if (!(cfg.density >= 0.0) || !(cfg.mass > 0.0))
        throw DomainError("quadrature needs n >= 0 and m > 0");
}

} // namespace

double collision_quadrature_at(const VelocityDistribution& f, std::size_t node, const ScatteringKernel& kernel,
                               const QuadratureConfig& cfg)
{
    check(cfg);
    const auto& grid = f.grid();
    if (node >= grid.size())
        throw DomainError("quadrature: node index out of range");
    const Rule rb = gauss_unit(cfg.b_nodes);
    const std::size_t nphi = cfg.phi_nodes;
    std::vector<double> cs(nphi), sn(nphi);
    for (std::size_t l = 0; l < nphi; ++l) {
        const double phi = 2.0 * std::numbers::pi * (static_cast<double>(l) + 0.5) / static_cast<double>(nphi);
        cs[l] = std::cos(phi);
        sn[l] = std::sin(phi);
    }
    CollisionParams cp;
    cp.mass = cfg.mass;
    cp.interpolation = cfg.interpolation;
    const CollisionContext ctx(f, cp);
    const VelocityDistribution& field = ctx.field();
    const Vec3 p = grid.node(node);
    const double wp = ctx.weight(node);
    const double m = cfg.mass;
    double total = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Vec3 p1 = grid.node(j);
        const Vec3 d = p - p1;
        const double g = norm(d) / m;
        if (!(g > 0.0))
            continue;
        const double bm = kernel.b_max(g);
        const double area = std::numbers::pi * bm * bm;
        const CollisionFrame fr = collision_frame(d);
        double gain = 0.0;
        for (std::size_t k = 0; k < rb.x.size(); ++k) {
            const double chi = kernel.chi(bm * std::sqrt(rb.x[k]), g);
            double ring = 0.0;
            for (std::size_t l = 0; l < nphi; ++l) {
                const CollisionOutcome out = rotate_relative(p, p1, chi, fr.e2 * cs[l] + fr.e3 * sn[l]);
                ring += ctx.read(out.p) * ctx.read(out.p1);
            }
            gain += rb.w[k] * ring / static_cast<double>(nphi);
        }
        // f(p')f(p1') - f(p)f(p1) through the interpolated field; with the
        // Maxwell ratio the weights combine to M(p)M(p1) = M(p')M(p1').
        total += g * area * wp * ctx.weight(j) * (gain - field[node] * field[j]);
    }
    return cfg.density * total * grid.cell_volume();
}

std::vector<double> loss_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                               const QuadratureConfig& cfg)
{
    check(cfg);
    const auto& grid = f.grid();
    const long count = static_cast<long>(grid.size());
    std::vector<double> out(grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        if (f[ii] == 0.0)
            continue;
        const Vec3 p = grid.node(ii);
        double s = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (f[j] == 0.0)
                continue;
            const double g = norm(p - grid.node(j)) / cfg.mass;
            if (!(g > 0.0))
                continue;
            const double bm = kernel.b_max(g);
            s += g * std::numbers::pi * bm * bm * f[j];
        }
        out[ii] = cfg.density * f[ii] * s * grid.cell_volume();
    }
    return out;
}

namespace {

// Deposit one collision of rate R between lattice nodes i and j whose
// outgoing momentum (first particle) is `pout`. The pair is split between two
// lattice pairs (lambda, I + J - lambda) whose energies bracket the exact
// one. Returns false when no admissible pair exists; the caller then drops
// the collision altogether.
bool project(const VelocityGrid& grid, const std::array<long, 3>& ki, const std::array<long, 3>& kj, const Vec3& pout,
             double e0, double rate, std::vector<double>& gain)
{
    const long n = static_cast<long>(grid.n);
    const double h = grid.h();
    const double lo = grid.coord(0);
    long base[3];
    for (int a = 0; a < 3; ++a)
        base[a] = static_cast<long>(std::floor((pout[a] - lo) / h));

    struct Cand {
        std::size_t lam, mu;
        double energy, dist;
    };
    std::array<Cand, 8> cands;
    int count = 0;
    for (int c = 0; c < 8; ++c) {
        long lam[3], mu[3];
        bool ok = true;
        for (int a = 0; a < 3; ++a) {
            lam[a] = base[a] + ((c >> a) & 1);
            mu[a] = ki[a] + kj[a] - lam[a];
            if (lam[a] < 0 || lam[a] >= n || mu[a] < 0 || mu[a] >= n)
                ok = false;
        }
        if (!ok)
            continue;
        const Vec3 pl{grid.coord(static_cast<std::size_t>(lam[0])), grid.coord(static_cast<std::size_t>(lam[1])),
                      grid.coord(static_cast<std::size_t>(lam[2]))};
        const Vec3 pm{grid.coord(static_cast<std::size_t>(mu[0])), grid.coord(static_cast<std::size_t>(mu[1])),
                      grid.coord(static_cast<std::size_t>(mu[2]))};
        cands[count++] = {grid.index(lam[0], lam[1], lam[2]), grid.index(mu[0], mu[1], mu[2]),
                          norm2(pl) + norm2(pm), norm2(pl - pout)};
    }
    if (count == 0)
        return false;
    int near = 0;
    for (int c = 1; c < count; ++c)
        if (cands[c].dist < cands[near].dist)
            near = c;
    const double en = cands[near].energy;
    const double tol = 1e-13 * e0 + 1e-300;
    if (std::fabs(en - e0) <= tol) {
        gain[cands[near].lam] += rate;
        gain[cands[near].mu] += rate;
        return true;
    }
    int far = -1;
    for (int c = 0; c < count; ++c) {
        if (c == near)
            continue;
        const bool opposite = (cands[c].energy - e0) * (en - e0) < 0.0;
        if (opposite && (far < 0 || cands[c].dist < cands[far].dist))
            far = c;
    }
    if (far < 0)
        return false;
    const double r = (e0 - en) / (cands[far].energy - en);
    gain[cands[near].lam] += (1.0 - r) * rate;
    gain[cands[near].mu] += (1.0 - r) * rate;
    gain[cands[far].lam] += r * rate;
    gain[cands[far].mu] += r * rate;
    return true;
}

std::vector<double> conservative_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                       const QuadratureConfig& cfg)
{
    const auto& grid = f.grid();
    const std::size_t size = grid.size();
    const std::size_t n = grid.n;
    const double dv = grid.cell_volume();
    const Rule rb = gauss_unit(cfg.b_nodes);
    const std::size_t nphi = cfg.phi_nodes;
    std::vector<double> cs(nphi), sn(nphi);
    for (std::size_t l = 0; l < nphi; ++l) {
        const double phi = 2.0 * std::numbers::pi * (static_cast<double>(l) + 0.5) / static_cast<double>(nphi);
        cs[l] = std::cos(phi);
        sn[l] = std::sin(phi);
    }

    const double fmax = *std::max_element(f.values().begin(), f.values().end());
    const double cut = cfg.pair_threshold * fmax * fmax;
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < size; ++k)
        if (f[k] > 0.0 && f[k] * fmax > cut)
            active.push_back(k);

    // Fixed blocks with private accumulators, merged in block order: the
    // sum does not depend on how blocks are scheduled.
    const long blocks = 64;
    std::vector<std::vector<double>> gain(static_cast<std::size_t>(blocks), std::vector<double>(size, 0.0));
    std::vector<std::vector<double>> loss(static_cast<std::size_t>(blocks), std::vector<double>(size, 0.0));
    const std::size_t na = active.size();
#pragma omp parallel for schedule(dynamic, 1)
    for (long blk = 0; blk < blocks; ++blk) {
        auto& gb = gain[static_cast<std::size_t>(blk)];
        auto& lb = loss[static_cast<std::size_t>(blk)];
        for (std::size_t a = static_cast<std::size_t>(blk); a < na; a += static_cast<std::size_t>(blocks)) {
            const std::size_t i = active[a];
            const Vec3 p = grid.node(i);
            const std::array<long, 3> ki{static_cast<long>(i % n), static_cast<long>((i / n) % n),
                                         static_cast<long>(i / (n * n))};
            for (std::size_t b = a + 1; b < na; ++b) {
                const std::size_t j = active[b];
                const double ff = f[i] * f[j];
                if (!(ff > cut))
                    continue;
                const Vec3 p1 = grid.node(j);
                const Vec3 d = p - p1;
                const double g = norm(d) / cfg.mass;
                const double bm = kernel.b_max(g);
                const double pair_rate = cfg.density * g * std::numbers::pi * bm * bm * ff * dv * dv;
                const std::array<long, 3> kj{static_cast<long>(j % n), static_cast<long>((j / n) % n),
                                             static_cast<long>(j / (n * n))};
                const double e0 = norm2(p) + norm2(p1);
                const CollisionFrame fr = collision_frame(d);
                double kept = 0.0;
                for (std::size_t k = 0; k < rb.x.size(); ++k) {
                    const double chi = kernel.chi(bm * std::sqrt(rb.x[k]), g);
                    const double rate = pair_rate * rb.w[k] / static_cast<double>(nphi);
                    for (std::size_t l = 0; l < nphi; ++l) {
                        const CollisionOutcome out = rotate_relative(p, p1, chi, fr.e2 * cs[l] + fr.e3 * sn[l]);
                        if (project(grid, ki, kj, out.p, e0, rate, gb))
                            kept += rate;
                    }
                }
                lb[i] += kept;
                lb[j] += kept;
            }
        }
    }
    std::vector<double> out(size, 0.0);
    for (long blk = 0; blk < blocks; ++blk)
        for (std::size_t k = 0; k < size; ++k)
            out[k] += gain[static_cast<std::size_t>(blk)][k] - loss[static_cast<std::size_t>(blk)][k];
    for (double& v : out)
        v /= dv;
    return out;
}

} // namespace

std::vector<double> collision_quadrature(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                         const QuadratureConfig& cfg, QuadratureScheme scheme)
{
    check(cfg);
    if (cfg.density == 0.0)
        return std::vector<double>(f.values().size(), 0.0);
    if (scheme == QuadratureScheme::ConservativeProjection)
        return conservative_rates(f, kernel, cfg);
    std::vector<double> out(f.values().size(), 0.0);
    const long count = static_cast<long>(out.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long k = 0; k < count; ++k)
        out[static_cast<std::size_t>(k)] = collision_quadrature_at(f, static_cast<std::size_t>(k), kernel, cfg);
    return out;
}

} // namespace kinetic
