#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kinetic/errors.hpp"
#include "kinetic/vec3.hpp"

namespace kinetic {

enum class BoundaryMode { HardWall, Confining };

/// Axis-aligned box G = [0, L_x] x [0, L_y] x [0, L_z]. With dimension 1 only
/// the x axis is active; y and z components of positions stay zero.
struct SpatialDomain {
    int dimension = 3;
    Vec3 lengths{1.0, 1.0, 1.0};
    BoundaryMode boundary = BoundaryMode::HardWall;

    static SpatialDomain cube(int dimension, double side, BoundaryMode mode = BoundaryMode::HardWall);

    double volume() const;
    bool contains(const Vec3& q) const;
    void validate() const;
};

enum class PotentialKind { PowerLaw, HardSphere, None };

/// Repulsive pair interaction Phi(s) = C s^-gamma evaluated at the scaled
/// separation s = r / mu. The hard-sphere variant (contact at s = diameter)
/// only exists as a scattering oracle; None switches interactions off.
struct InteractionPotential {
    PotentialKind kind = PotentialKind::PowerLaw;
    double coefficient = 1.0;
    double exponent = 4.0;
    double scale = 1.0;
    double diameter = 1.0;

    static InteractionPotential power_law(double coefficient, double exponent, double scale = 1.0);
    static InteractionPotential hard_sphere(double diameter, double scale = 1.0);
    static InteractionPotential none(double scale = 1.0);

    void validate() const;

    // Phi(s) and dPhi/ds for the dimensionless argument.
    double value(double s) const;
    double derivative(double s) const;

    // Energy and repulsive force magnitude of a pair at physical distance r.
    double pair_energy(double r) const { return value(r / scale); }
    double pair_force(double r) const { return -derivative(r / scale) / scale; }
};

double potential_value(const InteractionPotential& pot, double r);

/// External potential U(q). The default soft wall is
/// U(q) = kappa * sum_k [q_k^-2 + (L_k - q_k)^-2] over the active axes;
/// none() is U = 0 inside G, which pairs with hard-wall reflection.
class ConfiningPotential {
public:
    static ConfiningPotential none();
    static ConfiningPotential soft_walls(const SpatialDomain& domain, double stiffness);

    bool is_zero() const { return stiffness_ == 0.0; }
    double stiffness() const { return stiffness_; }

    double energy(const Vec3& q) const;
    Vec3 force(const Vec3& q) const;

private:
    double stiffness_ = 0.0;
    int dimension_ = 3;
    Vec3 lengths_{};
};

struct ParticleEnsemble {
    double mass = 1.0;
    std::vector<Vec3> positions;
    std::vector<Vec3> momenta;

    std::size_t size() const { return positions.size(); }
    void validate(const SpatialDomain& domain) const;
};

/// H = sum p^2/2m + sum_{i>j} Phi(|q_i - q_j| / mu) + sum U(q_i).
/// Terms are accumulated in a label-independent order, so relabeling the
/// particles or flipping all momenta reproduces the value bit for bit.
double hamiltonian(const ParticleEnsemble& ens, const InteractionPotential& pot, const ConfiningPotential& walls);

double kinetic_energy(const ParticleEnsemble& ens);
Vec3 total_momentum(const ParticleEnsemble& ens);

/// Normalized Maxwellian in `dimension` momentum components, variance m*T each.
double maxwell_density(const Vec3& p, double mass, double temperature, const Vec3& mean, int dimension = 3);
double maxwell_density(double p, double mass, double temperature, double mean);

struct ConfidenceSpec {
    double center = 0.0;
    double half_width = 1.0;
    double level = 0.997;
};

struct GaussianDensity {
    double mean = 0.0;
    double sigma = 1.0;

    double operator()(double x) const;
    double mass_between(double a, double b) const;
};

/// Gaussian whose interval center +- half_width carries the stated confidence.
/// The conventional levels 0.683 / 0.954 / 0.997 are read as the 1/2/3-sigma
/// rule (sigma = half_width / k); any other level goes through the inverse
/// error function.
GaussianDensity density_from_confidence(const ConfidenceSpec& spec);

} // namespace kinetic
