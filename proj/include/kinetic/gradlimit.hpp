#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kinetic/boltzmann.hpp"
#include "kinetic/core.hpp"
#include "kinetic/dynamics.hpp"
#include "kinetic/scattering.hpp"

namespace kinetic {

struct Rung {
    std::size_t particles = 0;
    double mu = 0.0;
};

/// Ladder of (N_k, mu_k) with N_k mu_k^2 = kappa, R runs per rung.
struct ScalingConfig {
    double kappa = 0.0;
    std::vector<Rung> ladder;
    std::size_t runs = 32;
    // Remark mode: particle mass m mu^2 and potential mu^2 Phi, momenta
    // scaled by mu^2. Positions evolve exactly as in the unscaled system.
    bool rescale_mass = false;

    // Rungs N_0 * 4^k with mu_0 / 2^k, kappa = N_0 mu_0^2.
    static ScalingConfig geometric(std::size_t n0, double mu0, std::size_t rungs, std::size_t runs);
    void validate() const;
};

/// Sum of weighted Maxwellians, the momentum factor of f1^0.
struct MomentumMixture {
    struct Component {
        double weight = 1.0;
        Vec3 mean{};
        double temperature = 1.0;
    };
    std::vector<Component> components;
    double mass = 1.0;

    static MomentumMixture maxwell(double mass, double temperature);
    // Equal-weight pair of Maxwellians at +-delta along x.
    static MomentumMixture bimodal(double mass, double temperature, double delta);

    void validate() const;
    double density(const Vec3& p) const; // normalized over R^3
    // Probability of the box [lo, hi] (exact, through erf).
    double box_probability(const Vec3& lo, const Vec3& hi) const;
    Vec3 sample(std::mt19937_64& rng) const;
    double mean_speed() const; // <|p|> / m, closed form
};

/// Product-form initial datum f1^0(q, p) = V rho(q) phi(p). `spatial` holds
/// one Gaussian per active axis (truncated to the box); empty means uniform.
struct InitialDatum {
    SpatialDomain domain;
    std::vector<GaussianDensity> spatial;
    MomentumMixture momentum;

    void validate() const;
    double spatial_density(const Vec3& q) const; // normalized over G
};

struct SamplingStats {
    std::size_t attempts = 0;
    std::size_t rejected = 0;
    double rejection_rate() const { return attempts ? static_cast<double>(rejected) / attempts : 0.0; }
};

/// N independent draws of f1^0 / V, redrawing a position whenever it lands
/// within 3 mu of an accepted particle. Throws FeasibilityError once more
/// than 99% of at least 1000 attempts have been rejected.
ParticleEnsemble sample_ensemble(const InitialDatum& f0, std::size_t n, double mu, double mass, std::mt19937_64& rng,
                                 SamplingStats* stats = nullptr);

/// Histogram cells over (q, p): q_bins per spatial axis over the box,
/// p_bins per momentum axis over [-p_cap, p_cap]. Axes with one bin are
/// integrated out.
struct PhaseBins {
    SpatialDomain domain;
    std::array<std::size_t, 3> q_bins{1, 1, 1};
    std::array<std::size_t, 3> p_bins{8, 8, 8};
    double p_cap = 6.0;

    void validate() const;
    std::size_t size() const;
    // Cell of (q, p), or size() when p lies outside the momentum cube.
    std::size_t cell(const Vec3& q, const Vec3& p) const;
    double cell_volume() const; // dq dp
    Vec3 p_center(std::size_t cell) const;
    Vec3 q_center(std::size_t cell) const;
};

/// Pooled histogram. density() follows the convention that f1 integrates to
/// V over phase space; probabilities() are cell masses divided by the sample
/// count (particles outside the momentum cube count in the total only).
class EmpiricalMarginal {
public:
    EmpiricalMarginal() = default;
    explicit EmpiricalMarginal(PhaseBins bins);

    void add(const Vec3& q, const Vec3& p);
    void merge(const EmpiricalMarginal& other);

    const PhaseBins& bins() const { return bins_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t samples() const { return samples_; }
    std::vector<double> probabilities() const;
    std::vector<double> density() const;

    void write_csv(std::ostream& out) const;

private:
    PhaseBins bins_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t samples_ = 0;
};

/// Pooled f1 over all particles of all runs. Every run must have the same
/// particle count and mass.
EmpiricalMarginal empirical_f1(std::span<const ParticleEnsemble> runs, const PhaseBins& bins);

/// Cell probabilities of a reference density: uniform (or the datum's
/// spatial profile) in q times a momentum histogram or density in p.
std::vector<double> reference_probabilities(const PhaseBins& bins, const InitialDatum& f0);
std::vector<double> reference_probabilities(const PhaseBins& bins, const std::vector<Vec3>& momenta);

/// L1 distance between cell probability vectors (0..2). The mass outside the
/// momentum cube enters as one extra cell.
double probability_l1(const std::vector<double>& a, const std::vector<double>& b);

/// Expected L1 between a histogram of `samples` draws from `p` and p itself
/// (plus a reference of `reference_samples` draws when nonzero), by
/// parametric bootstrap. Returns {mean, standard deviation}.
struct NoiseFloor {
    double mean = 0.0;
    double sd = 0.0;
};
NoiseFloor histogram_noise_floor(const std::vector<double>& p, std::uint64_t samples, std::uint64_t reference_samples,
                                 std::size_t replicates, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Factorization of the pair marginal.

/// Coarse bins for f2: 8 cells per axis over (q_x, p_x), or over (p_x, p_y)
/// in momentum-only mode.
struct FactorizationConfig {
    std::size_t bins_per_axis = 8;
    bool momentum_only = false;
    double p_cap = 6.0;
    std::size_t bootstrap = 200;
    double confidence = 0.95;
    std::uint64_t seed = 1;
};

struct FactorizationResult {
    double raw = 0.0;      // L1(f2, f1 x f1) over the coarse pair cells
    double baseline = 0.0; // same statistic for independent draws of the pooled f1
    double value = 0.0;    // raw - baseline
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t pairs = 0;
};

/// Pair histogram over ordered pairs i != j within each run, pooled over
/// runs, against the product of the pooled single histogram. The baseline
/// and the interval come from the bootstrap: baseline replicates redraw
/// every particle from the pooled f1 (same N, same R); interval replicates
/// resample whole runs.
FactorizationResult factorization_error(std::span<const ParticleEnsemble> runs, const SpatialDomain& domain,
                                        const FactorizationConfig& cfg);

/// The correlation g2 = f2 - f1 x f1 composed with the backward two-body
/// flow over dtau * mu, momentum-only mode. Each pair cell is represented by
/// its two cell centers placed at impact offset b (perpendicular to the
/// relative velocity) from each other; the flow carries them to pre-collision
/// momenta and g2 is read in the cells they land in, averaged over b and
/// azimuth. `pot` carries the runs' mu; `kernel` is its scale-1 table.
struct PullbackConfig {
    double dtau = 20.0;        // Delta t / mu
    std::size_t b_nodes = 4;   // impact parameters, uniform in b^2 up to b_max
    std::size_t phi_nodes = 4; // azimuths
    double dt_micro = 0.05;    // two-body step in units of mu / |g|
    double release = 8.0;      // straight lines beyond this separation / mu
};
FactorizationResult pullback_factorization_error(std::span<const ParticleEnsemble> runs,
                                                 const InteractionPotential& pot, const ScatteringKernel& kernel,
                                                 const FactorizationConfig& cfg, const PullbackConfig& pull);

/// Two-body flow of (q1, p1), (q2, p2) in free space for time t (negative t
/// runs backwards) with the velocity-Verlet splitting of the MD integrator
/// and step `dt`. With release > 0 a pair that is farther apart than
/// `release` and receding finishes the interval on straight lines.
struct PairState {
    Vec3 q1, p1, q2, p2;
};
PairState two_body_flow(const PairState& s, const InteractionPotential& pot, double mass, double t, double dt,
                        double release = 0.0);

// ---------------------------------------------------------------------------
// Rescalings.

struct RescaledParticle {
    double mass;
    InteractionPotential potential;
};
/// m_mu = mu^2 m, Phi_mu = mu^2 Phi.
RescaledParticle rescale_masses(double mass, const InteractionPotential& pot, double mu);

/// (xi, tau) = (q / mu, t / mu).
struct MicroCoordinates {
    Vec3 xi;
    double tau;
};
MicroCoordinates rescale_coordinates(const Vec3& q, double t, double mu);

// ---------------------------------------------------------------------------
// Sweep.

struct SweepOptions {
    std::vector<double> checkpoints{0.0, 0.5, 1.0, 2.0}; // in mean free times
    double dtau = 0.02;           // MD step in units of mu (the micro time)
    double cutoff = 8.0;          // force cutoff in units of mu
    PhaseBins bins;               // D_k cells
    FactorizationConfig factorization;
    std::size_t reference_particles = 1000000;
    double reference_dt = 0.02;   // DSMC step in mean free times
    std::size_t bootstrap = 200;
    std::size_t floor_replicates = 200;
    double confidence = 0.95;
    std::uint64_t seed = 1;
    bool collisionless = false;   // control: Phi off on both sides
    bool reversal = false;        // also run every ensemble back to t = 0
};

struct CheckpointResult {
    double t = 0.0;
    double raw = 0.0;   // D: L1 between pooled f1 and the reference
    double sd = 0.0;    // run-bootstrap standard deviation of D
    double ci_low = 0.0, ci_high = 0.0;
    double floor = 0.0; // expected D from sampling noise alone
    double floor_sd = 0.0;
    double excess = 0.0; // D - floor, with the same spread
    double excess_low = 0.0, excess_high = 0.0;
    FactorizationResult factorization;
};

struct RungResult {
    Rung rung;
    std::size_t runs = 0;
    double mass = 1.0;
    double md_dt = 0.0;
    double rejection_rate = 0.0;
    double max_energy_drift = 0.0;       // relative, over all runs
    double initial_interaction_ratio = 0.0; // largest interaction / kinetic energy at t = 0
    double reversal_l1 = -1.0;           // f1 after the round trip vs f1 at t = 0
    double reversal_floor = 0.0;
    std::vector<CheckpointResult> checkpoints;
    std::vector<std::uint64_t> seeds;
    std::vector<EmpiricalMarginal> histograms; // one per checkpoint
};

struct TrendTest {
    bool decreasing = false;
    std::vector<double> z;       // one-sided statistics between adjacent rungs
    std::vector<double> p_value; // one-sided
};

struct SweepReport {
    double kappa = 0.0;
    double volume = 0.0;
    double density = 0.0;          // n = kappa / V
    double mean_free_time = 0.0;
    double mean_speed = 0.0;
    bool collisionless = false;
    std::vector<double> times;     // checkpoint times
    std::vector<RungResult> rungs;
    std::vector<std::vector<double>> reference; // cell probabilities per checkpoint
    std::uint64_t reference_samples = 0;
    // Trend of D at the last checkpoint, and at every checkpoint; then the
    // same for the excess over the noise floor. D shrinks with the sample
    // count N R even when the excess does not.
    TrendTest trend;
    std::vector<TrendTest> trend_by_checkpoint;
    TrendTest excess_trend;
    std::vector<TrendTest> excess_trend_by_checkpoint;

    void write_json(std::ostream& out) const;
};

/// Mean free time 1 / (n pi b_max(u)^2 u) for the scale-1 kernel at density
/// n = kappa / V (b_max scales with mu, so n pi (mu b)^2 = kappa pi b^2 / V).
double mean_free_time(const ScatteringKernel& kernel, double density, double mean_speed, double mass);

/// Side of the cube in which the mean free path at density kappa / V equals
/// `mean_free_path` (kappa pi b_max(u)^2 l = V, u the datum's mean speed).
double cube_side_for_mean_free_path(const ScatteringKernel& kernel, const MomentumMixture& momentum, double kappa,
                                    double mean_free_path);

/// Runs every rung, compares pooled f1 with a DSMC solution of the spatially
/// homogeneous Boltzmann equation at n = kappa / V. Needs a uniform spatial
/// profile and hard walls. `kernel` is the scale-1 table of `pot`.
SweepReport scaling_sweep(const ScalingConfig& cfg, const InitialDatum& f0, const InteractionPotential& pot,
                          const ScatteringKernel& kernel, const SweepOptions& opt);

/// One-sided test that a statistic decreases from rung to rung: adjacent
/// differences over their bootstrap standard deviations, each at the given
/// confidence.
TrendTest trend_test(const std::vector<double>& values, const std::vector<double>& sds, double confidence);

} // namespace kinetic
