#include "kinetic/boltzmann.hpp"

#include "kinetic/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinetic {

DsmcGas::DsmcGas(std::vector<Vec3> momenta, const ScatteringKernel& kernel, const DsmcConfig& cfg)
    : momenta_(std::move(momenta)), kernel_(&kernel), cfg_(cfg)
{
    if (momenta_.size() < 2)
        throw DomainError("DSMC needs at least two particles");
    if (!(cfg.dt > 0.0) || !(cfg.density >= 0.0) || !(cfg.mass > 0.0))
        throw DomainError("DSMC needs dt > 0, n >= 0 and m > 0");
    for (double g : kernel.g_grid()) {
        const double bm = kernel.b_max(g);
        rate_max_ = std::max(rate_max_, g * std::numbers::pi * bm * bm);
    }
    rate_max_ *= 1.05;
}

void DsmcGas::advance(double t)
{
    if (!(t >= 0.0))
        throw DomainError("DSMC cannot run backwards");
    const std::size_t n = momenta_.size();
    const double ln = static_cast<double>(n);
    // Each step gets its own stream, so advance(a); advance(b) equals the
    // same total in one call.
    const std::size_t steps = static_cast<std::size_t>(std::llround(t / cfg_.dt));
    for (std::size_t s = 0; s < steps; ++s) {
        auto rng = make_stream(cfg_.seed, draws_++, 0x64736d63ULL);
        // No-time-counter selection: candidates at the majorant rate,
        // accepted with probability g sigma / (g sigma)_max.
        const double expected = 0.5 * ln * cfg_.density * rate_max_ * cfg_.dt + remainder_;
        const auto candidates = static_cast<std::size_t>(expected);
        remainder_ = expected - static_cast<double>(candidates);
        for (std::size_t c = 0; c < candidates; ++c) {
            const std::size_t i = static_cast<std::size_t>(u01(rng) * ln);
            std::size_t j = static_cast<std::size_t>(u01(rng) * (ln - 1.0));
            if (j >= i)
                ++j;
            const double u_acc = u01(rng);
            const double u_b = u01(rng);
            const double u_phi = u01(rng);
            const Vec3 d = momenta_[i] - momenta_[j];
            const double g = norm(d) / cfg_.mass;
            if (!(g > 0.0))
                continue;
            const double bm = kernel_->b_max(g);
            const double rate = g * std::numbers::pi * bm * bm;
            if (rate > rate_max_)
                rate_max_ = rate;
            if (u_acc * rate_max_ >= rate)
                continue;
            const double chi = kernel_->chi(bm * std::sqrt(u_b), g);
            const double phi = 2.0 * std::numbers::pi * u_phi;
            const CollisionFrame fr = collision_frame(d);
            const CollisionOutcome out =
                rotate_relative(momenta_[i], momenta_[j], chi, fr.e2 * std::cos(phi) + fr.e3 * std::sin(phi));
            momenta_[i] = out.p;
            momenta_[j] = out.p1;
            ++collisions_;
        }
        time_ += cfg_.dt;
    }
}

VelocityDistribution DsmcGas::histogram(const VelocityGrid& grid) const
{
    VelocityDistribution out(grid);
    const double h = grid.h();
    const long n = static_cast<long>(grid.n);
    for (const Vec3& p : momenta_) {
        long k[3];
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
            k[a] = static_cast<long>(std::floor((p[a] + grid.p_cap) / h));
            if (k[a] < 0 || k[a] >= n)
                inside = false;
        }
        if (inside)
            out.values()[grid.index(static_cast<std::size_t>(k[0]), static_cast<std::size_t>(k[1]),
                                    static_cast<std::size_t>(k[2]))] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(momenta_.size()) * grid.cell_volume());
    for (double& v : out.values())
        v *= scale;
    return out;
}

} // namespace kinetic
