#pragma once

#include <iosfwd>
#include <vector>

#include "kinetic/core.hpp"

namespace kinetic {

enum class QuadratureRule { GaussLegendre64, TanhSinh };

/// Turning point of the relative motion: the largest root of
/// 1 - b^2/r^2 - Phi(r/mu)/E_rel with E_rel = m g^2 / 4 (reduced mass m/2).
double closest_approach(double b, double g, const InteractionPotential& pot, double mass = 1.0);

/// Classical deflection angle chi(b, g) in [0, pi]:
///   chi = pi - 2 b \int_{r_min}^inf dr / (r^2 sqrt(1 - b^2/r^2 - Phi/E_rel)).
/// Evaluated with u = r_min / r and u = 1 - w^2, which leaves a smooth
/// integrand on w in [0, 1].
double deflection_angle(double b, double g, const InteractionPotential& pot, double mass = 1.0,
                        QuadratureRule rule = QuadratureRule::GaussLegendre64);

struct CollisionOutcome {
    Vec3 p;
    Vec3 p1;
};

/// Orthonormal frame with e1 along `direction`. e2 comes from Gram-Schmidt
/// against the coordinate axis where |direction| has its smallest component.
struct CollisionFrame {
    Vec3 e1, e2, e3;
};
CollisionFrame collision_frame(const Vec3& direction);

/// Rotate the relative momentum of (p, p1) by chi towards the unit vector
/// `towards` (perpendicular to p - p1), keeping the center of mass fixed.
CollisionOutcome rotate_relative(const Vec3& p, const Vec3& p1, double chi, const Vec3& towards);

/// Post-collision momenta for impact parameter b and azimuth phi measured in
/// collision_frame(p - p1).
CollisionOutcome post_collision_momenta(const Vec3& p, const Vec3& p1, double b, double phi,
                                        const InteractionPotential& pot, double mass);

/// Smallest b with chi(b, g) < chi_min, by bisection.
double b_max_for(const InteractionPotential& pot, double g, double chi_min, double mass = 1.0);

/// Tabulated chi(b, g). Row j belongs to g_j and spans b in [0, b_max(g_j)]
/// through the reduced coordinate x = b / b_max(g_j); lookups interpolate
/// bilinearly in (x, log g). Beyond b_max the deflection is taken as zero.
class ScatteringKernel {
public:
    ScatteringKernel() = default;
    ScatteringKernel(std::vector<double> reduced_b, std::vector<double> g, std::vector<double> b_max,
                     std::vector<double> chi, double chi_min);

    double chi(double b, double g) const;
    double b_max(double g) const;

    // Row position for a speed g, reusable for several impact parameters.
    struct Lookup {
        std::size_t row = 0;
        double t = 0.0;     // weight of row + 1 (clamped to [0, 1])
        double b_max = 0.0;
    };
    Lookup lookup(double g) const;
    double chi(const Lookup& at, double b) const;

    const std::vector<double>& reduced_b() const { return x_; }
    const std::vector<double>& g_grid() const { return g_; }
    const std::vector<double>& b_max_grid() const { return b_max_; }
    const std::vector<double>& table() const { return chi_; }
    double chi_min() const { return chi_min_; }
    double chi_at(std::size_t ib, std::size_t ig) const { return chi_[ig * x_.size() + ib]; }

    void write_csv(std::ostream& out) const;
    static ScatteringKernel read_csv(std::istream& in);

private:
    std::vector<double> x_;
    std::vector<double> g_;
    std::vector<double> log_g_;
    std::vector<double> b_max_;
    std::vector<double> chi_; // row-major, one row per g node
    std::vector<double> log_b_max_;
    double chi_min_ = 1e-2;
    // Set when log g is uniformly spaced: O(1) row search.
    bool uniform_g_ = false;
    double inv_dlg_ = 0.0;
    // x_guide_[k]: last node with x^2 <= k / x_guide_.size(), for an O(1)
    // start of the cell search on grids close to uniform in x^2.
    std::vector<std::size_t> x_guide_;
};

struct KernelGrid {
    std::vector<double> reduced_b;
    std::vector<double> g;

    // n_b nodes uniform in x^2 on [0, 1], except that the first interval,
    // the widest in x, is split into four (same node count); n_g nodes
    // log-spaced on [g_lo, g_hi].
    static KernelGrid standard(double g_lo, double g_hi, std::size_t n_b = 256, std::size_t n_g = 64);
};

/// Fill the kernel table. Parallel over g rows. After filling, the bilinear
/// lookup is compared with direct quadrature at `validation_samples` cell
/// midpoints; the largest deviation is returned through `midpoint_error`.
ScatteringKernel build_kernel_table(const InteractionPotential& pot, double mass, const KernelGrid& grid,
                                    double chi_min = 1e-2, std::size_t validation_samples = 0,
                                    double* midpoint_error = nullptr);

} // namespace kinetic
