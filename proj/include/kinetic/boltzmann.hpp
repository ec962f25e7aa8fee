#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kinetic/core.hpp"
#include "kinetic/liouville.hpp"
#include "kinetic/scattering.hpp"

namespace kinetic {

/// Cubic momentum grid, n nodes per axis, cell-centered on [-p_cap, p_cap].
/// With n even every node coordinate is a half-integer multiple of the
/// spacing, so p_i + p_j - p_k is again a lattice point.
struct VelocityGrid {
    std::size_t n = 32;
    double p_cap = 6.0;

    double h() const { return 2.0 * p_cap / static_cast<double>(n); }
    double cell_volume() const { return h() * h() * h(); }
    double coord(std::size_t k) const { return -p_cap + (static_cast<double>(k) + 0.5) * h(); }
    std::size_t size() const { return n * n * n; }
    std::size_t index(std::size_t kx, std::size_t ky, std::size_t kz) const { return (kz * n + ky) * n + kx; }
    Vec3 node(std::size_t idx) const { return {coord(idx % n), coord((idx / n) % n), coord(idx / (n * n))}; }
    void validate() const;
};

struct Moments {
    double mass = 0.0;
    Vec3 mean_momentum{};
    double energy = 0.0; // \int p^2 / 2m f dp
};

/// Spatially homogeneous f(p), normalized to unit mass on the grid.
class VelocityDistribution {
public:
    explicit VelocityDistribution(VelocityGrid grid);

    static VelocityDistribution from_function(VelocityGrid grid, const std::function<double(const Vec3&)>& f);
    static VelocityDistribution maxwellian(VelocityGrid grid, double mass, double temperature, const Vec3& mean = {});

    const VelocityGrid& grid() const { return grid_; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t idx) const { return values_[idx]; }

    double mass() const;
    void normalize();

    /// Trilinear interpolation; `inside` is false (and the value 0) outside
    /// the node hull.
    double interpolate(const Vec3& p, bool* inside = nullptr) const;
    /// Tricubic Catmull-Rom interpolation, clipped at zero. Outside the node
    /// hull the point is clamped onto it (the edge value is held) and
    /// `inside` is set false.
    double interpolate_cubic(const Vec3& p, bool* inside = nullptr) const;

    void write_csv(std::ostream& out) const;

private:
    VelocityGrid grid_;
    std::vector<double> values_;
};

Moments moments(const VelocityDistribution& f, double mass);

/// \int f ln f dp with 0 ln 0 = 0.
double h_functional(const VelocityDistribution& f);

/// Maxwellian on the same grid with the mass, mean momentum and energy of f.
VelocityDistribution matched_maxwellian(const VelocityDistribution& f, double mass);

double l1_distance(const VelocityDistribution& a, const VelocityDistribution& b);

/// Restore mass, momentum and energy to `target` by the tilt
/// f <- f exp(a + b.p + c p^2), solved by Newton's method.
void conservation_correction(VelocityDistribution& f, const Moments& target, double mass);

/// Monte Carlo collision rate at one node.
struct CollisionEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double clipped_fraction = 0.0; // samples whose outgoing momenta left the grid
    double roundoff = 0.0;         // bound on the floating-point error of the mean
    double loss = 0.0;             // loss-term part of the mean
    double clipped_loss = 0.0;     // loss throughput of the clipped samples
};

/// Partner momenta are drawn from f by inverse CDF over the grid nodes.
class NodeSampler {
public:
    explicit NodeSampler(const VelocityDistribution& f);
    std::size_t operator()(double u) const;

private:
    std::vector<double> cdf_;
    // guide_[b] = first index whose cdf exceeds b / guide_.size().
    std::vector<std::uint32_t> guide_;
};

// How f is read off at the off-grid outgoing momenta. Trilinear interpolates
// f itself. CubicMaxwellRatio interpolates r = f / M, M the matched
// Maxwellian, with tricubic Catmull-Rom; since M(p')M(p1') = M(p)M(p1) the
// integrand becomes M(p)M(p1) [r(p')r(p1') - r(p)r(p1)], which vanishes
// identically at equilibrium. A piecewise-linear interpolant has a kink at
// every node, and for grazing collisions (|p' - p| << h) that kink leaves an
// O(h |p' - p|) error where the true change is O(|p' - p|^2); the C1 cubic
// removes it.
enum class OffGridInterpolation { Trilinear, CubicMaxwellRatio };

struct CollisionParams {
    double density = 1.0; // n
    double mass = 1.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    OffGridInterpolation interpolation = OffGridInterpolation::CubicMaxwellRatio;
};

/// Precomputed per-f data shared by all node estimates of one step.
class CollisionContext {
public:
    CollisionContext(const VelocityDistribution& f, const CollisionParams& params);

    const VelocityDistribution& f() const { return *f_; }
    const NodeSampler& sampler() const { return sampler_; }
    // Interpolated field (f or f / M) and the node weight that turns it
    // back into f.
    const VelocityDistribution& field() const { return field_; }
    double weight(std::size_t node) const { return weight_.empty() ? 1.0 : weight_[node]; }
    double read(const Vec3& p, bool* inside = nullptr) const
    {
        return cubic_ ? field_.interpolate_cubic(p, inside) : field_.interpolate(p, inside);
    }

private:
    const VelocityDistribution* f_;
    NodeSampler sampler_;
    VelocityDistribution field_;
    std::vector<double> weight_;
    bool cubic_ = false;
};

/// St f(p_node) = n \int |p - p1|/m [f(p')f(p1') - f(p)f(p1)] dsigma dp1 with
/// dsigma = b db dphi over b < b_max(g). Randomness is drawn from a stream
/// keyed by (seed, node, stream).
CollisionEstimate collision_integral(const VelocityDistribution& f, std::size_t node, const ScatteringKernel& kernel,
                                     const CollisionParams& params, std::uint64_t stream = 0);
CollisionEstimate collision_integral(const CollisionContext& ctx, std::size_t node, const ScatteringKernel& kernel,
                                     const CollisionParams& params, std::uint64_t stream);

/// Rates at every node (nodes whose f and whose matched-Maxwellian value both
/// fall below `skip_below` times their maxima are set to zero). Parallel over
/// nodes; independent of the thread count.
std::vector<CollisionEstimate> collision_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                               const CollisionParams& params, std::uint64_t stream,
                                               double skip_below = 0.0);

enum class TimeScheme { ForwardEuler, Midpoint };

struct HomogeneousConfig {
    CollisionParams collision;
    double dt = 0.01;
    TimeScheme scheme = TimeScheme::ForwardEuler;
    double skip_below = 1e-6;
    bool correct_conservation = true;
};

struct StepLog {
    double clipped_mass = 0.0;       // mass removed by clipping negative values
    double clipped_throughput = 0.0; // off-grid share of the collision throughput
    double raw_mass_drift = 0.0;     // before the conservation correction
    double raw_momentum_drift = 0.0;
    double raw_energy_drift = 0.0;
    double noise_l1 = 0.0;           // dt * \int std_error dp
    double roundoff_l1 = 0.0;        // dt * \int roundoff dp
    double h_noise = 0.0;            // dt * std error of the H increment
    double stability_ratio = 0.0;    // dt max|St f| / max f
};

/// One explicit step f <- f + dt St f, clipped at zero, renormalized and
/// tilted back onto the conserved moments of `target`.
VelocityDistribution step_homogeneous(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                      const HomogeneousConfig& cfg, const Moments& target, std::uint64_t step_index,
                                      StepLog* log = nullptr);

struct HTrace {
    std::vector<double> times;
    std::vector<double> h;
    std::vector<Moments> moments;
    std::vector<double> l1_to_maxwell;
    std::vector<double> h_noise;   // per-step standard error of the H increment
    std::vector<double> noise_l1;  // per-step L1 Monte Carlo noise injected
    std::vector<double> roundoff_l1; // per-step L1 rounding bound
    std::vector<StepLog> logs;
    std::vector<VelocityDistribution> checkpoints;
    VelocityDistribution final_state{VelocityGrid{}};

    void write_csv(std::ostream& out) const;
    /// Random-walk bound on the Monte Carlo part (root sum of squares) plus
    /// the rounding part summed linearly, since rounding does not average out.
    double accumulated_noise() const;
};

/// Iterate step_homogeneous to t_final. Checkpoints of f are kept at the
/// requested times (rounded to steps).
HTrace relax_to_equilibrium(const VelocityDistribution& f0, const ScatteringKernel& kernel,
                            const HomogeneousConfig& cfg, double t_final,
                            const std::vector<double>& checkpoint_times = {});

/// Least-squares slope of H(t) with its one-sided upper confidence bound.
struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double upper_bound = 0.0;
};
SlopeFit h_slope(const HTrace& trace, double confidence = 0.99);

/// First time the L1 distance to the matched Maxwellian falls to 1/e of its
/// initial value (linear interpolation between samples); infinity if never.
double relaxation_time(const HTrace& trace);

// ---------------------------------------------------------------------------
// Deterministic quadrature of St f on a tensor grid over (p1 nodes) x (b) x (phi).

enum class QuadratureScheme {
    // Same integrand as the Monte Carlo estimator; per-node oracle.
    Interpolated,
    // Discrete-velocity scheme: each collision's outgoing pair is projected
    // onto two lattice pairs with energy-bracketing weights, so mass,
    // momentum and energy balance exactly.
    ConservativeProjection,
};

struct QuadratureConfig {
    std::size_t b_nodes = 32;
    std::size_t phi_nodes = 16;
    double density = 1.0;
    double mass = 1.0;
    double pair_threshold = 1e-10; // skip pairs with f_i f_j below this times max f^2
    // Interpolated scheme only; should match the Monte Carlo setting.
    OffGridInterpolation interpolation = OffGridInterpolation::CubicMaxwellRatio;
};

double collision_quadrature_at(const VelocityDistribution& f, std::size_t node, const ScatteringKernel& kernel,
                               const QuadratureConfig& cfg);

std::vector<double> collision_quadrature(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                         const QuadratureConfig& cfg, QuadratureScheme scheme);

/// |\int phi St f dp| / \int |phi| (gain + loss) dp for phi = 1, p_x, p_y, p_z, p^2/2m.
struct ConservationReport {
    double mass = 0.0;
    Vec3 momentum{};
    double energy = 0.0;
    double worst() const;
};
ConservationReport conservation_errors(const VelocityDistribution& f, const std::vector<double>& rate,
                                       const std::vector<double>& flux_scale, double mass);
/// Node-wise loss rate n f(p) \int g f(p1) dsigma dp1, the flux scale used
/// by conservation_errors.
std::vector<double> loss_rates(const VelocityDistribution& f, const ScatteringKernel& kernel,
                               const QuadratureConfig& cfg);

// ---------------------------------------------------------------------------
// Direct simulation Monte Carlo, homogeneous, no-time-counter collision
// selection. Independent of the grid solver; used as its oracle.

struct DsmcConfig {
    std::size_t particles = 200000;
    double density = 1.0;
    double mass = 1.0;
    double dt = 0.01;
    std::uint64_t seed = 1;
};

class DsmcGas {
public:
    DsmcGas(std::vector<Vec3> momenta, const ScatteringKernel& kernel, const DsmcConfig& cfg);

    void advance(double t);
    double time() const { return time_; }
    const std::vector<Vec3>& momenta() const { return momenta_; }
    std::size_t collisions() const { return collisions_; }

    /// Histogram on the nodes of `grid`, normalized as a density.
    VelocityDistribution histogram(const VelocityGrid& grid) const;

private:
    std::vector<Vec3> momenta_;
    const ScatteringKernel* kernel_;
    DsmcConfig cfg_;
    double rate_max_ = 0.0; // upper bound of g * pi b_max(g)^2
    double time_ = 0.0;
    double remainder_ = 0.0;
    std::size_t collisions_ = 0;
    std::uint64_t draws_ = 0;
};

/// L1 distance between the axis marginals of two distributions (largest
/// over the three axes).
double marginal_l1(const VelocityDistribution& a, const VelocityDistribution& b);

/// Node values converted to cell averages, f + (h^2/24) * discrete Laplacian
/// (zero beyond the grid). A particle histogram estimates cell averages, so
/// compare it with this rather than with the point values.
VelocityDistribution cell_averages(const VelocityDistribution& f);

// ---------------------------------------------------------------------------
// 1-D slab: f(q, p) with q in [0, L] (hard walls) and p on a VelocityGrid.

class SlabDistribution {
public:
    SlabDistribution(double length, std::size_t nq, VelocityGrid grid);

    double length() const { return length_; }
    std::size_t nq() const { return nq_; }
    const VelocityGrid& grid() const { return grid_; }

    double& at(std::size_t iq, std::size_t node) { return values_[iq * grid_.size() + node]; }
    double at(std::size_t iq, std::size_t node) const { return values_[iq * grid_.size() + node]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double mass() const;
    VelocityDistribution local(std::size_t iq) const; // unnormalized slice

private:
    double length_;
    std::size_t nq_;
    VelocityGrid grid_;
    std::vector<double> values_;
};

/// Transport terms -p_x/m df/dq + U'(q) df/dp_x by one semi-Lagrangian step:
/// every (p_y, p_z) slice is a (q, p_x) phase density advanced with the
/// Liouville kernel.
SlabDistribution transport_step(const SlabDistribution& f, const ConfiningPotential& walls, double mass, double dt);

/// Strang splitting: half transport, full collision per slab cell (local
/// density n times the cell's share of mass), half transport.
SlabDistribution strang_step(const SlabDistribution& f, const ScatteringKernel& kernel, const HomogeneousConfig& cfg,
                             std::uint64_t step_index);

namespace reference {

/// Serial node loop of collision_rates. Same streams, same numbers.
std::vector<CollisionEstimate> collision_rates_serial(const VelocityDistribution& f, const ScatteringKernel& kernel,
                                                      const CollisionParams& params, std::uint64_t stream,
                                                      double skip_below = 0.0);

} // namespace reference

} // namespace kinetic
