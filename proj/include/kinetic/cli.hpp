#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace kinetic::cli {

/// Config rejected before any computation. `path` names the offending field
/// ("potential.exponent"); empty for file-level problems.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& message);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Failure while an experiment runs, tagged with the stage it happened in.
class RuntimeFailure : public std::runtime_error {
public:
    RuntimeFailure(std::string module, const std::string& message);
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

enum ExitCode : int { Success = 0, Validation = 1, Runtime = 2, Threshold = 3 };

struct PowerLawSpec {
    double coefficient = 1.0;
    double exponent = 4.0;
    double scale = 1.0;
};

struct MdReversalConfig {
    PowerLawSpec potential{1.0, 12.0, 1.0};
    int dimension = 3;
    double length = 20.0;
    bool soft_walls = false;
    double wall_stiffness = 1e-3;
    std::size_t particles = 100;
    double mass = 1.0;
    double temperature = 1.0;
    double cutoff = 10.0;
    double dt = 1e-4;
    std::size_t steps = 1000;         // each leg of the round trip
    std::size_t energy_steps = 10000;
    std::size_t sample_every = 10;
    double max_reversal_error = 1e-6;
    double max_energy_drift = 1e-6;
};

struct LiouvilleBoxConfig {
    double length = 1.0;
    std::string boundary = "hard-wall"; // hard-wall | open | soft-wall
    double wall_stiffness = 1e-3;
    double mass = 1.0;
    std::size_t nq = 256;
    std::size_t np = 256;
    double p_cap = 6.0;
    double q_mean = 0.3;
    double q_sigma = 0.05;
    double p_mean = 0.0;
    double p_rms = 1.0;
    double crossings = 50.0; // t_final = crossings * L m / p_rms
    std::size_t steps = 200;
    bool require_localized = true;
    std::size_t oracle_samples = 1000000;
    std::size_t oracle_bins = 64;
    double max_distance = 0.05;
    double max_oracle_gap = 0.01;
};

struct ScatteringTableConfig {
    std::string kind = "power-law"; // power-law | hard-sphere
    PowerLawSpec potential;
    double diameter = 1.0;
    double mass = 1.0;
    std::size_t b_nodes = 256;
    std::size_t g_nodes = 64;
    double g_min = 0.05;
    double g_max = 20.0;
    double chi_min = 1e-2;
    std::size_t validation_samples = 200;
    double max_midpoint_error = 1e-3;
};

struct MixtureSpec {
    std::string kind = "bimodal"; // bimodal | maxwell
    double temperature = 1.0;
    double delta = 1.5;
};

struct BoltzmannRelaxConfig {
    PowerLawSpec potential;
    double mass = 1.0;
    double density = 0.05;
    std::size_t n = 24;
    double p_cap_over_rms = 6.0;
    MixtureSpec initial;
    std::size_t kernel_b_nodes = 128;
    std::size_t kernel_g_nodes = 32;
    double chi_min = 1e-2;
    std::size_t samples = 300;
    std::string interpolation = "cubic-ratio"; // cubic-ratio | trilinear
    double skip_below = 1e-6;
    double dt = 0.2;
    double t_final = 12.0;
    std::string scheme = "euler"; // euler | midpoint
    std::size_t dsmc_particles = 1000000;
    double dsmc_dt = 0.05;
    std::size_t maxwell_steps = 10;
    double maxwell_dt = 0.1;
    std::size_t conservation_n = 0; // 0: skip the quadrature conservation check
    double h_confidence = 0.99;
    double max_terminal_l1 = 0.05;
    double max_dsmc_l1 = 0.05;
    double maxwell_factor = 3.0;
    double max_conservation = 1e-3;
};

struct GradSweepConfig {
    std::size_t n0 = 250;
    double mu0 = 1.0;
    std::size_t rungs = 3;
    std::size_t runs = 32;
    PowerLawSpec potential;
    MixtureSpec momentum;
    double mass = 1.0;
    std::optional<double> length;   // cube side
    double mu_over_mean_free_path = 0.5; // used when length is absent
    std::vector<double> checkpoints{0.0, 0.5, 1.0, 2.0};
    double dtau = 0.02;
    double cutoff = 8.0;
    std::array<std::size_t, 3> q_bins{1, 1, 1};
    std::array<std::size_t, 3> p_bins{8, 8, 8};
    double p_cap = 6.0;
    std::size_t factorization_bins = 8;
    bool factorization_momentum_only = false;
    std::size_t reference_particles = 400000;
    double reference_dt = 0.02;
    std::size_t bootstrap = 200;
    std::size_t floor_replicates = 200;
    double confidence = 0.95;
    bool control = true;
    bool reversal = false;
};

using ExperimentParams =
    std::variant<MdReversalConfig, LiouvilleBoxConfig, ScatteringTableConfig, BoltzmannRelaxConfig, GradSweepConfig>;

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 1;
    std::optional<std::string> output_dir;
    ExperimentParams params;
    std::string text; // the file as read, for the manifest hash
};

/// Schema check and conversion; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> experiment_kinds();

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    int threads = 0; // 0: leave the OpenMP default
    std::filesystem::path config_path;
};

struct RunOutcome {
    int exit_code = Success;
    std::filesystem::path directory;
    std::vector<std::string> failed_checks;
    std::vector<std::string> files;
};

/// Output directory: --out, else the config's output_dir, else
/// $KINETIC_OUTPUT_DIR (or "runs") / <config stem>.
std::filesystem::path output_directory(const ExperimentConfig& cfg, const RunOptions& opt);

/// Runs the experiment and writes its artifacts plus manifest.json. Numeric
/// artifacts depend only on the config and the seed.
RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opt);

struct PlotOutcome {
    std::vector<std::string> written;
    std::vector<std::string> warnings;
};

/// One SVG line plot per series file found in `dir` (h_trace.csv,
/// distance.csv, trend.csv, control_trend.csv).
PlotOutcome plot_directory(const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

} // namespace kinetic::cli
