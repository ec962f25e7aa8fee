#include "kinetic/gradlimit.hpp"

#include "kinetic/random.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace kinetic {

namespace {

// Coarse cell for the pair statistics; values beyond the range land in the
// edge bins so every particle is counted.
struct CoarseCells {
    std::size_t nb;
    bool momentum_only;
    double p_cap;
    double length;

    std::size_t axis(double v, double lo, double hi) const
    {
        const double t = (v - lo) / (hi - lo) * static_cast<double>(nb);
        if (!(t > 0.0))
            return 0;
        return std::min(nb - 1, static_cast<std::size_t>(t));
    }
    std::size_t operator()(const Vec3& q, const Vec3& p) const
    {
        if (momentum_only)
            return axis(p.x, -p_cap, p_cap) * nb + axis(p.y, -p_cap, p_cap);
        return axis(q.x, 0.0, length) * nb + axis(p.x, -p_cap, p_cap);
    }
    double center(std::size_t k) const { return -p_cap + (static_cast<double>(k) + 0.5) * 2.0 * p_cap / nb; }
    std::size_t size() const { return nb * nb; }
};

using RunCounts = std::vector<std::vector<double>>; // [run][cell]

// Sources of each ordered pair cell: the statistic reads the mean of g2 over
// them. Empty means the identity.
using PairMap = std::vector<std::vector<std::uint32_t>>;

double statistic(const RunCounts& counts, const std::vector<std::size_t>& pick, const PairMap& map)
{
    const std::size_t b = counts[0].size();
    std::vector<double> p1(b, 0.0), p2(b * b, 0.0);
    double singles = 0.0, pairs = 0.0;
    for (std::size_t r : pick) {
        const auto& c = counts[r];
        double n = 0.0;
        for (std::size_t a = 0; a < b; ++a) {
            p1[a] += c[a];
            n += c[a];
            if (c[a] == 0.0)
                continue;
            for (std::size_t d = 0; d < b; ++d)
                p2[a * b + d] += c[a] * c[d];
            p2[a * b + a] -= c[a];
        }
        singles += n;
        pairs += n * (n - 1.0);
    }
    for (double& v : p1)
        v /= singles;
    std::vector<double> g2(b * b);
    for (std::size_t a = 0; a < b; ++a)
        for (std::size_t d = 0; d < b; ++d)
            g2[a * b + d] = p2[a * b + d] / pairs - p1[a] * p1[d];
    double s = 0.0;
    if (map.empty()) {
        for (double v : g2)
            s += std::fabs(v);
        return s;
    }
    for (const auto& src : map) {
        double m = 0.0;
        for (std::uint32_t k : src)
            m += g2[k];
        s += std::fabs(m / static_cast<double>(src.size()));
    }
    return s;
}

FactorizationResult evaluate(const RunCounts& counts, const FactorizationConfig& cfg, const PairMap& map)
{
    const std::size_t runs = counts.size();
    const std::size_t b = counts[0].size();
    std::vector<std::size_t> all(runs);
    std::vector<double> pooled(b, 0.0);
    std::vector<double> sizes(runs, 0.0);
    double total_pairs = 0.0, total = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        all[r] = r;
        for (std::size_t a = 0; a < b; ++a) {
            pooled[a] += counts[r][a];
            sizes[r] += counts[r][a];
        }
        if (sizes[r] < 2.0)
            throw InputError("factorization needs at least two particles per run");
        total_pairs += sizes[r] * (sizes[r] - 1.0);
        total += sizes[r];
    }
    if (total_pairs < 10.0 * static_cast<double>(b * b))
        throw ResolutionError(fmt::format("factorization: {:.0f} pairs for {} pair cells; use coarser bins",
                                          total_pairs, b * b));
    for (double& v : pooled)
        v /= total;

    FactorizationResult res;
    res.pairs = static_cast<std::size_t>(total_pairs);
    res.raw = statistic(counts, all, map);

    // Null: every particle redrawn from the pooled f1, same run sizes.
    auto rng = make_stream(cfg.seed, 0x66616374ULL, runs);
    std::vector<double> cdf(b);
    double acc = 0.0;
    for (std::size_t a = 0; a < b; ++a) {
        acc += pooled[a];
        cdf[a] = acc;
    }
    cdf.back() = 1.0;
    double s = 0.0, s2 = 0.0;
    RunCounts null(runs, std::vector<double>(b));
    for (std::size_t rep = 0; rep < cfg.bootstrap; ++rep) {
        for (std::size_t r = 0; r < runs; ++r) {
            std::fill(null[r].begin(), null[r].end(), 0.0);
            const auto n = static_cast<std::size_t>(sizes[r]);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = u01(rng);
                const auto k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
                null[r][std::min(k, b - 1)] += 1.0;
            }
        }
        const double v = statistic(null, all, map);
        s += v;
        s2 += v * v;
    }
    const double nb = static_cast<double>(cfg.bootstrap);
    res.baseline = s / nb;
    double sd = std::sqrt(std::max(0.0, (s2 - s * s / nb) / (nb - 1.0)));

    // Run resampling for the spread under the actual dependence.
    if (runs >= 2) {
        double t = 0.0, t2 = 0.0;
        std::vector<std::size_t> pick(runs);
        for (std::size_t rep = 0; rep < cfg.bootstrap; ++rep) {
            for (auto& k : pick)
                k = static_cast<std::size_t>(u01(rng) * static_cast<double>(runs));
            const double v = statistic(counts, pick, map);
            t += v;
            t2 += v * v;
        }
        sd = std::max(sd, std::sqrt(std::max(0.0, (t2 - t * t / nb) / (nb - 1.0))));
    }
    res.value = res.raw - res.baseline;
    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + cfg.confidence));
    res.ci_low = res.value - z * sd;
    res.ci_high = res.value + z * sd;
    return res;
}

void check(const FactorizationConfig& cfg)
{
    if (cfg.bins_per_axis < 2 || !(cfg.p_cap > 0.0) || cfg.bootstrap < 2)
        throw DomainError("factorization needs >= 2 bins per axis, p_cap > 0 and >= 2 bootstrap replicates");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
        throw DomainError("factorization confidence must lie in (0, 1)");
}

RunCounts count_runs(std::span<const ParticleEnsemble> runs, const CoarseCells& cells)
{
    if (runs.empty())
        throw InputError("factorization needs at least one run");
    RunCounts counts(runs.size(), std::vector<double>(cells.size(), 0.0));
    for (std::size_t r = 0; r < runs.size(); ++r) {
        if (runs[r].positions.size() != runs[r].momenta.size())
            throw InputError("ensemble positions and momenta differ in length");
        for (std::size_t i = 0; i < runs[r].size(); ++i)
            counts[r][cells(runs[r].positions[i], runs[r].momenta[i])] += 1.0;
    }
    return counts;
}

} // namespace

FactorizationResult factorization_error(std::span<const ParticleEnsemble> runs, const SpatialDomain& domain,
                                        const FactorizationConfig& cfg)
{
    check(cfg);
    domain.validate();
    const CoarseCells cells{cfg.bins_per_axis, cfg.momentum_only, cfg.p_cap, domain.lengths.x};
    return evaluate(count_runs(runs, cells), cfg, {});
}

PairState two_body_flow(const PairState& s, const InteractionPotential& pot, double mass, double t, double dt,
                        double release)
{
    if (!(dt > 0.0) || !(mass > 0.0))
        throw DomainError("two-body flow needs dt > 0 and m > 0");
    PairState st = s;
    const bool back = t < 0.0;
    if (back) {
        st.p1 = -st.p1;
        st.p2 = -st.p2;
    }
    const double span = std::fabs(t);
    const auto steps = static_cast<std::size_t>(std::ceil(span / dt));
    const double h = steps ? span / static_cast<double>(steps) : 0.0;
    // Velocity Verlet, the same splitting as the MD integrator.
    auto force = [&](const PairState& x) {
        const Vec3 r = x.q1 - x.q2;
        const double d = norm(r);
        if (d == 0.0)
            throw SingularityError("two-body flow: coincident particles");
        return r * (pot.pair_force(d) / d);
    };
    Vec3 f = pot.kind == PotentialKind::None ? Vec3{} : force(st);
    for (std::size_t k = 0; k < steps; ++k) {
        if (release > 0.0) {
            const Vec3 r = st.q1 - st.q2;
            if (norm2(r) > release * release && dot(r, st.p1 - st.p2) > 0.0) {
                const double rest = h * static_cast<double>(steps - k);
                st.q1 += st.p1 * (rest / mass);
                st.q2 += st.p2 * (rest / mass);
                break;
            }
        }
        st.p1 += f * (0.5 * h);
        st.p2 -= f * (0.5 * h);
        st.q1 += st.p1 * (h / mass);
        st.q2 += st.p2 * (h / mass);
        if (pot.kind != PotentialKind::None)
            f = force(st);
        st.p1 += f * (0.5 * h);
        st.p2 -= f * (0.5 * h);
    }
    if (back) {
        st.p1 = -st.p1;
        st.p2 = -st.p2;
    }
    return st;
}

FactorizationResult pullback_factorization_error(std::span<const ParticleEnsemble> runs,
                                                 const InteractionPotential& pot, const ScatteringKernel& kernel,
                                                 const FactorizationConfig& cfg, const PullbackConfig& pull)
{
    check(cfg);
    if (!(pull.dtau > 0.0) || pull.b_nodes < 1 || pull.phi_nodes < 1 || !(pull.dt_micro > 0.0) ||
        !(pull.release >= 0.0))
        throw DomainError("pullback needs dtau > 0, dt_micro > 0, release >= 0 and at least one impact node");
    if (runs.empty())
        throw InputError("factorization needs at least one run");
    const CoarseCells cells{cfg.bins_per_axis, true, cfg.p_cap, 1.0};
    const std::size_t b = cells.size();
    const double mass = runs[0].mass;
    const double mu = pot.scale;

    PairMap map(b * b);
#pragma omp parallel for schedule(dynamic, 16)
    for (long pc = 0; pc < static_cast<long>(b * b); ++pc) {
        const std::size_t a = static_cast<std::size_t>(pc) / b, d = static_cast<std::size_t>(pc) % b;
        const Vec3 pa{cells.center(a / cells.nb), cells.center(a % cells.nb), 0.0};
        const Vec3 pd{cells.center(d / cells.nb), cells.center(d % cells.nb), 0.0};
        const Vec3 rel = pa - pd;
        const double g = norm(rel) / mass;
        auto& src = map[static_cast<std::size_t>(pc)];
        if (!(g > 0.0) || pot.kind == PotentialKind::None) {
            src.push_back(static_cast<std::uint32_t>(pc));
            continue;
        }
        const double bm = kernel.b_max(g) * mu;
        const CollisionFrame fr = collision_frame(rel);
        for (std::size_t i = 0; i < pull.b_nodes; ++i) {
            const double bb = bm * std::sqrt((static_cast<double>(i) + 0.5) / static_cast<double>(pull.b_nodes));
            for (std::size_t j = 0; j < pull.phi_nodes; ++j) {
                const double phi = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) /
                                   static_cast<double>(pull.phi_nodes);
                const Vec3 off = (fr.e2 * std::cos(phi) + fr.e3 * std::sin(phi)) * (0.5 * bb);
                const PairState start{off, pa, -off, pd};
                const PairState pre =
                    two_body_flow(start, pot, mass, -pull.dtau * mu, pull.dt_micro * mu / g, pull.release * mu);
                src.push_back(static_cast<std::uint32_t>(cells({}, pre.p1) * b + cells({}, pre.p2)));
            }
        }
    }
    return evaluate(count_runs(runs, cells), cfg, map);
}

} // namespace kinetic
