#include "kinetic/gradlimit.hpp"

#include "kinetic/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <ostream>

namespace kinetic {

void PhaseBins::validate() const
{
    domain.validate();
    if (!(p_cap > 0.0))
        throw DomainError("phase bins need p_cap > 0");
    for (int a = 0; a < 3; ++a) {
        if (q_bins[a] < 1 || p_bins[a] < 1)
            throw DomainError("phase bins need at least one bin per axis");
        if (a >= domain.dimension && q_bins[a] != 1)
            throw DomainError(fmt::format("phase bins: axis {} is inactive in a {}-D box", a, domain.dimension));
    }
}

std::size_t PhaseBins::size() const
{
    std::size_t s = 1;
    for (int a = 0; a < 3; ++a)
        s *= q_bins[a] * p_bins[a];
    return s;
}

std::size_t PhaseBins::cell(const Vec3& q, const Vec3& p) const
{
    std::size_t idx = 0;
    for (int a = 0; a < 3; ++a) {
        const std::size_t nb = q_bins[a];
        std::size_t k = 0;
        if (nb > 1) {
            const double t = q[a] / domain.lengths[a] * static_cast<double>(nb);
            k = t <= 0.0 ? 0 : std::min(nb - 1, static_cast<std::size_t>(t));
        }
        idx = idx * nb + k;
    }
    for (int a = 0; a < 3; ++a) {
        const std::size_t nb = p_bins[a];
        std::size_t k = 0;
        if (nb > 1) {
            if (!(std::fabs(p[a]) <= p_cap))
                return size();
            const double t = (p[a] + p_cap) / (2.0 * p_cap) * static_cast<double>(nb);
            k = std::min(nb - 1, static_cast<std::size_t>(t));
        }
        idx = idx * nb + k;
    }
    return idx;
}

double PhaseBins::cell_volume() const
{
    double v = 1.0;
    for (int a = 0; a < domain.dimension; ++a)
        v *= domain.lengths[a] / static_cast<double>(q_bins[a]);
    for (int a = 0; a < 3; ++a)
        if (p_bins[a] > 1)
            v *= 2.0 * p_cap / static_cast<double>(p_bins[a]);
    return v;
}

namespace {

// Per-axis bin indices of a cell: q0 q1 q2 p0 p1 p2.
std::array<std::size_t, 6> unpack(const PhaseBins& b, std::size_t cell)
{
    std::array<std::size_t, 6> k{};
    const std::size_t n[6] = {b.q_bins[0], b.q_bins[1], b.q_bins[2], b.p_bins[0], b.p_bins[1], b.p_bins[2]};
    for (int a = 5; a >= 0; --a) {
        k[a] = cell % n[a];
        cell /= n[a];
    }
    return k;
}

} // namespace

Vec3 PhaseBins::p_center(std::size_t cell) const
{
    const auto k = unpack(*this, cell);
    Vec3 p{};
    for (int a = 0; a < 3; ++a)
        if (p_bins[a] > 1)
            p[a] = -p_cap + (static_cast<double>(k[3 + a]) + 0.5) * 2.0 * p_cap / static_cast<double>(p_bins[a]);
    return p;
}

Vec3 PhaseBins::q_center(std::size_t cell) const
{
    const auto k = unpack(*this, cell);
    Vec3 q{};
    for (int a = 0; a < domain.dimension; ++a)
        q[a] = (static_cast<double>(k[a]) + 0.5) * domain.lengths[a] / static_cast<double>(q_bins[a]);
    return q;
}

EmpiricalMarginal::EmpiricalMarginal(PhaseBins bins) : bins_(std::move(bins))
{
    bins_.validate();
    counts_.assign(bins_.size() + 1, 0);
}

void EmpiricalMarginal::add(const Vec3& q, const Vec3& p)
{
    ++counts_[bins_.cell(q, p)];
    ++samples_;
}

void EmpiricalMarginal::merge(const EmpiricalMarginal& other)
{
    if (other.counts_.size() != counts_.size())
        throw InputError("cannot merge histograms over different bins");
    for (std::size_t k = 0; k < counts_.size(); ++k)
        counts_[k] += other.counts_[k];
    samples_ += other.samples_;
}

std::vector<double> EmpiricalMarginal::probabilities() const
{
    std::vector<double> out(counts_.size(), 0.0);
    if (samples_ == 0)
        return out;
    for (std::size_t k = 0; k < counts_.size(); ++k)
        out[k] = static_cast<double>(counts_[k]) / static_cast<double>(samples_);
    return out;
}

std::vector<double> EmpiricalMarginal::density() const
{
    std::vector<double> out = probabilities();
    out.pop_back();
    const double scale = bins_.domain.volume() / bins_.cell_volume();
    for (double& v : out)
        v *= scale;
    return out;
}

void EmpiricalMarginal::write_csv(std::ostream& out) const
{
    out << "cell,qx,qy,qz,px,py,pz,count,f1\n";
    const auto f = density();
    for (std::size_t c = 0; c < bins_.size(); ++c) {
        const Vec3 q = bins_.q_center(c), p = bins_.p_center(c);
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", c, q.x, q.y, q.z, p.x,
                           p.y, p.z, counts_[c], f[c]);
    }
}

EmpiricalMarginal empirical_f1(std::span<const ParticleEnsemble> runs, const PhaseBins& bins)
{
    if (runs.empty())
        throw InputError("empirical_f1 needs at least one run");
    EmpiricalMarginal h(bins);
    const std::size_t n = runs[0].size();
    for (const auto& r : runs) {
        if (r.size() != n || r.momenta.size() != n)
            throw InputError(fmt::format("empirical_f1: runs hold {} and {} particles", n, r.size()));
        if (r.mass != runs[0].mass)
            throw InputError("empirical_f1: runs differ in particle mass");
        for (std::size_t i = 0; i < n; ++i)
            h.add(r.positions[i], r.momenta[i]);
    }
    return h;
}

namespace {

std::vector<double> spatial_probabilities(const PhaseBins& bins, const InitialDatum* f0)
{
    std::size_t nq = bins.q_bins[0] * bins.q_bins[1] * bins.q_bins[2];
    std::vector<double> out(nq, 1.0);
    for (std::size_t c = 0; c < nq; ++c) {
        std::size_t rest = c;
        std::array<std::size_t, 3> k{};
        for (int a = 2; a >= 0; --a) {
            k[a] = rest % bins.q_bins[a];
            rest /= bins.q_bins[a];
        }
        for (int a = 0; a < bins.domain.dimension; ++a) {
            const double nb = static_cast<double>(bins.q_bins[a]);
            if (!f0 || f0->spatial.empty()) {
                out[c] /= nb;
                continue;
            }
            const double L = bins.domain.lengths[a];
            const auto& g = f0->spatial[a];
            out[c] *= g.mass_between(L * k[a] / nb, L * (k[a] + 1) / nb) / g.mass_between(0.0, L);
        }
    }
    return out;
}

std::size_t p_cells(const PhaseBins& bins)
{
    return bins.p_bins[0] * bins.p_bins[1] * bins.p_bins[2];
}

std::vector<double> combine(const PhaseBins& bins, const std::vector<double>& q, const std::vector<double>& p,
                            double outside)
{
    std::vector<double> out(bins.size() + 1, 0.0);
    const std::size_t np = p.size();
    for (std::size_t a = 0; a < q.size(); ++a)
        for (std::size_t b = 0; b < np; ++b)
            out[a * np + b] = q[a] * p[b];
    out.back() = outside;
    return out;
}

} // namespace

std::vector<double> reference_probabilities(const PhaseBins& bins, const InitialDatum& f0)
{
    bins.validate();
    f0.validate();
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t np = p_cells(bins);
    std::vector<double> p(np);
    double inside = 0.0;
    for (std::size_t c = 0; c < np; ++c) {
        std::size_t rest = c;
        Vec3 lo, hi;
        for (int a = 2; a >= 0; --a) {
            const std::size_t nb = bins.p_bins[a];
            const std::size_t k = rest % nb;
            rest /= nb;
            if (nb == 1) {
                lo[a] = -inf;
                hi[a] = inf;
                continue;
            }
            const double w = 2.0 * bins.p_cap / static_cast<double>(nb);
            lo[a] = -bins.p_cap + w * static_cast<double>(k);
            hi[a] = lo[a] + w;
        }
        p[c] = f0.momentum.box_probability(lo, hi);
        inside += p[c];
    }
    return combine(bins, spatial_probabilities(bins, &f0), p, std::max(0.0, 1.0 - inside));
}

std::vector<double> reference_probabilities(const PhaseBins& bins, const std::vector<Vec3>& momenta)
{
    bins.validate();
    if (momenta.empty())
        throw InputError("reference histogram needs momenta");
    PhaseBins pb = bins;
    pb.q_bins = {1, 1, 1};
    std::vector<double> p(p_cells(bins), 0.0);
    double outside = 0.0;
    const double w = 1.0 / static_cast<double>(momenta.size());
    for (const Vec3& m : momenta) {
        const std::size_t c = pb.cell({}, m);
        if (c == pb.size())
            outside += w;
        else
            p[c] += w;
    }
    return combine(bins, spatial_probabilities(bins, nullptr), p, outside);
}

double probability_l1(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw InputError("probability vectors differ in length");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += std::fabs(a[k] - b[k]);
    return s;
}

namespace {

// Multinomial draw by sequential binomials.
void multinomial(const std::vector<double>& p, std::uint64_t n, std::mt19937_64& rng, std::vector<double>& freq)
{
    freq.assign(p.size(), 0.0);
    double rest_p = 1.0;
    std::uint64_t rest_n = n;
    for (std::size_t k = 0; k < p.size() && rest_n > 0; ++k) {
        if (p[k] <= 0.0)
            continue;
        std::uint64_t c = rest_n;
        if (k + 1 < p.size() && p[k] < rest_p) {
            std::binomial_distribution<std::uint64_t> bin(rest_n, std::min(1.0, p[k] / rest_p));
            c = bin(rng);
        }
        freq[k] = static_cast<double>(c) / static_cast<double>(n);
        rest_n -= c;
        rest_p -= p[k];
    }
}

} // namespace

NoiseFloor histogram_noise_floor(const std::vector<double>& p, std::uint64_t samples, std::uint64_t reference_samples,
                                 std::size_t replicates, std::uint64_t seed)
{
    if (samples == 0 || replicates < 2)
        throw DomainError("noise floor needs samples and at least two replicates");
    auto rng = make_stream(seed, 0x666c6f6fULL, samples);
    std::vector<double> a, b;
    double s = 0.0, s2 = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        multinomial(p, samples, rng, a);
        double d;
        if (reference_samples > 0) {
            multinomial(p, reference_samples, rng, b);
            d = probability_l1(a, b);
        } else {
            d = probability_l1(a, p);
        }
        s += d;
        s2 += d * d;
    }
    const double n = static_cast<double>(replicates);
    NoiseFloor out;
    out.mean = s / n;
    out.sd = std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)));
    return out;
}

} // namespace kinetic
