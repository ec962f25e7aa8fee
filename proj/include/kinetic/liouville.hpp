#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kinetic/core.hpp"

namespace kinetic {

// HardWall: U = 0 inside [0, L] with specular walls. Open: vacuum outside
// [0, L] (free line). Confining: soft-wall U supplied to the step.
enum class PhaseBoundary { HardWall, Open, Confining };

/// Cell-centered grid: q_i = (i + 1/2) dq on [0, L], p_j = -p_cap + (j + 1/2) dp.
/// The momentum grid is symmetric, so p -> -p maps node j to np - 1 - j.
struct PhaseGrid {
    double length = 1.0;
    std::size_t nq = 256;
    double p_cap = 6.0;
    std::size_t np = 256;

    double dq() const { return length / static_cast<double>(nq); }
    double dp() const { return 2.0 * p_cap / static_cast<double>(np); }
    double q(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dq(); }
    double p(std::size_t j) const { return -p_cap + (static_cast<double>(j) + 0.5) * dp(); }
    void validate() const;
};

/// One-particle phase-space probability density rho(q, p) on a PhaseGrid.
/// Storage is column-major in momentum: value(i, j) lives at j * nq + i.
class PhaseDensity {
public:
    PhaseDensity(PhaseGrid grid, PhaseBoundary boundary = PhaseBoundary::HardWall);

    /// Sample f at the nodes and normalize to unit mass.
    static PhaseDensity from_function(PhaseGrid grid, const std::function<double(double q, double p)>& f,
                                      PhaseBoundary boundary = PhaseBoundary::HardWall);

    const PhaseGrid& grid() const { return grid_; }
    PhaseBoundary boundary() const { return boundary_; }

    double& at(std::size_t i, std::size_t j) { return values_[j * grid_.nq + i]; }
    double at(std::size_t i, std::size_t j) const { return values_[j * grid_.nq + i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double mass() const;
    void normalize();
    double max_value() const;
    double momentum_variance() const;
    // Fraction of the mass in the first and last momentum rows.
    double boundary_mass_fraction() const;

    void write_csv(std::ostream& out) const;

private:
    PhaseGrid grid_;
    PhaseBoundary boundary_;
    std::vector<double> values_;
};

struct LiouvilleStepLog {
    double raw_mass_drift = 0.0; // |mass before renormalization - 1|
};

/// One semi-Lagrangian step of d rho/dt = {H, rho} for H = p^2/2m + U(q):
/// every node takes the value at the foot of its backward characteristic,
/// read off with clipped cubic interpolation; the result is renormalized
/// (except in Open mode, where mass may leave through the ends).
/// Parallel over momentum columns.
PhaseDensity liouville_step(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt,
                            LiouvilleStepLog* log = nullptr);

std::vector<double> position_marginal(const PhaseDensity& rho);

/// (1/2) \int |sigma(q) - 1/|G|| dq on a uniform grid of cell width |G| / n.
double uniformity_distance(const std::vector<double>& sigma, double length);

void write_marginal_csv(std::ostream& out, const std::vector<double>& sigma, double length);

struct DelocalizationOptions {
    std::size_t steps = 200;
    bool require_localized = true;
};

struct DelocalizationSeries {
    std::vector<double> times;
    std::vector<double> distance;
    PhaseDensity final_state;
    double max_raw_mass_drift = 0.0;

    void write_json(std::ostream& out) const;
};

/// Evolve rho0 to t_final in `steps` equal steps, recording the total
/// variation distance of the position marginal from uniform after each step.
DelocalizationSeries delocalization_experiment(const PhaseDensity& rho0, const ConfiningPotential& walls, double mass,
                                               double t_final, const DelocalizationOptions& opts = {});

/// Position marginal at time t of free flight from rho0(q, p) = q0(q) p0(p)
/// (q0 truncated to [0, L]), by following `samples` characteristics exactly:
/// reflected at the walls in HardWall mode, lost beyond them in Open mode.
/// Returns the probability of each of `bins` equal cells.
std::vector<double> characteristics_marginal(const GaussianDensity& q0, const GaussianDensity& p0, double length,
                                             double mass, double t, PhaseBoundary boundary, std::size_t samples,
                                             std::size_t bins, std::uint64_t seed);

/// Sums of `fine` over consecutive groups, fine.size() / coarse per group,
/// scaled by `weight`.
std::vector<double> coarsen(const std::vector<double>& fine, std::size_t coarse, double weight = 1.0);

namespace reference {

/// Node-by-node serial version of liouville_step. Oracle for the column kernel.
PhaseDensity liouville_step_serial(const PhaseDensity& rho, const ConfiningPotential& walls, double mass, double dt);

} // namespace reference

} // namespace kinetic
