#include "kinetic/cli.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace kinetic::cli {

ValidationError::ValidationError(std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path))
{
}

RuntimeFailure::RuntimeFailure(std::string module, const std::string& message)
    : std::runtime_error(module + ": " + message), module_(std::move(module))
{
}

namespace {

using json = nlohmann::json;

enum class Bound { Any, Positive, NonNegative, Unit };

// One JSON object under validation. Every key read is remembered; done()
// rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(&j), path_(std::move(path))
    {
        if (!j.is_object())
            throw ValidationError(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_->contains(key); }

    const json* get(const std::string& key)
    {
        seen_.insert(key);
        const auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    double number(const std::string& key, double def, Bound bound = Bound::Any)
    {
        const json* v = get(key);
        if (!v)
            return def;
        if (!v->is_number())
            throw ValidationError(at(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x))
            throw ValidationError(at(key), "must be finite");
        switch (bound) {
        case Bound::Positive:
            if (!(x > 0.0))
                throw ValidationError(at(key), fmt::format("must be > 0, got {}", x));
            break;
        case Bound::NonNegative:
            if (!(x >= 0.0))
                throw ValidationError(at(key), fmt::format("must be >= 0, got {}", x));
            break;
        case Bound::Unit:
            if (!(x > 0.0 && x < 1.0))
                throw ValidationError(at(key), fmt::format("must lie in (0, 1), got {}", x));
            break;
        case Bound::Any:
            break;
        }
        return x;
    }

    std::size_t count(const std::string& key, std::size_t def, std::size_t min = 0)
    {
        const json* v = get(key);
        if (!v)
            return def;
        // 1e6 written as a float is accepted when it is integral.
        if (!v->is_number())
            throw ValidationError(at(key), "expected an integer");
        const double x = v->get<double>();
        if (!(x >= 0.0) || x != std::floor(x) || x > 9e15)
            throw ValidationError(at(key), fmt::format("expected a non-negative integer, got {}", v->dump()));
        const auto n = static_cast<std::size_t>(x);
        if (n < min)
            throw ValidationError(at(key), fmt::format("must be >= {}, got {}", min, n));
        return n;
    }

    bool flag(const std::string& key, bool def)
    {
        const json* v = get(key);
        if (!v)
            return def;
        if (!v->is_boolean())
            throw ValidationError(at(key), "expected true or false");
        return v->get<bool>();
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options)
    {
        const json* v = get(key);
        if (!v)
            return def;
        if (!v->is_string())
            throw ValidationError(at(key), "expected a string");
        const auto s = v->get<std::string>();
        for (const auto& o : options)
            if (s == o)
                return s;
        throw ValidationError(at(key), fmt::format("'{}' is not one of {}", s, fmt::join(options, ", ")));
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def)
    {
        const json* v = get(key);
        if (!v)
            return def;
        if (!v->is_array() || v->empty())
            throw ValidationError(at(key), "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number())
                throw ValidationError(fmt::format("{}[{}]", at(key), i), "expected a number");
            out.push_back((*v)[i].get<double>());
        }
        return out;
    }

    std::array<std::size_t, 3> triple(const std::string& key, std::array<std::size_t, 3> def)
    {
        const json* v = get(key);
        if (!v)
            return def;
        if (!v->is_array() || v->size() != 3)
            throw ValidationError(at(key), "expected an array of three integers");
        for (std::size_t i = 0; i < 3; ++i) {
            const auto& e = (*v)[i];
            if (!e.is_number_unsigned() || e.get<std::size_t>() < 1)
                throw ValidationError(fmt::format("{}[{}]", at(key), i), "expected an integer >= 1");
            def[i] = e.get<std::size_t>();
        }
        return def;
    }

    Fields object(const std::string& key)
    {
        static const json empty = json::object();
        const json* v = get(key);
        return Fields(v ? *v : empty, at(key));
    }

    void done() const
    {
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!seen_.count(it.key()))
                throw ValidationError(at(it.key()), "unknown key");
    }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

PowerLawSpec power_law(Fields f, PowerLawSpec def)
{
    def.coefficient = f.number("coefficient", def.coefficient, Bound::Positive);
    def.exponent = f.number("exponent", def.exponent, Bound::Positive);
    def.scale = f.number("scale", def.scale, Bound::Positive);
    f.done();
    return def;
}

MixtureSpec mixture(Fields f, MixtureSpec def)
{
    def.kind = f.choice("kind", def.kind, {"bimodal", "maxwell"});
    def.temperature = f.number("temperature", def.temperature, Bound::Positive);
    def.delta = f.number("delta", def.delta, Bound::NonNegative);
    if (def.kind == "maxwell" && f.has("delta"))
        throw ValidationError(f.at("delta"), "only bimodal data have a delta");
    f.done();
    return def;
}

MdReversalConfig md_reversal(Fields& root)
{
    MdReversalConfig c;
    c.potential = power_law(root.object("potential"), c.potential);
    {
        Fields d = root.object("domain");
        c.dimension = static_cast<int>(d.count("dimension", 3, 1));
        if (c.dimension > 3)
            throw ValidationError(d.at("dimension"), "must be 1, 2 or 3");
        c.length = d.number("length", c.length, Bound::Positive);
        c.soft_walls = d.choice("boundary", "hard-wall", {"hard-wall", "soft-wall"}) == "soft-wall";
        c.wall_stiffness = d.number("wall_stiffness", c.wall_stiffness, Bound::Positive);
        d.done();
    }
    {
        Fields p = root.object("particles");
        c.particles = p.count("count", c.particles, 2);
        c.mass = p.number("mass", c.mass, Bound::Positive);
        c.temperature = p.number("temperature", c.temperature, Bound::Positive);
        p.done();
    }
    c.cutoff = root.number("cutoff", c.cutoff, Bound::Positive);
    {
        Fields i = root.object("integrator");
        c.dt = i.number("dt", c.dt, Bound::Positive);
        c.steps = i.count("steps", c.steps, 1);
        c.energy_steps = i.count("energy_steps", c.energy_steps, 1);
        c.sample_every = i.count("sample_every", c.sample_every, 1);
        i.done();
    }
    {
        Fields t = root.object("thresholds");
        c.max_reversal_error = t.number("reversal_error", c.max_reversal_error, Bound::Positive);
        c.max_energy_drift = t.number("energy_drift", c.max_energy_drift, Bound::Positive);
        t.done();
    }
    return c;
}

LiouvilleBoxConfig liouville_box(Fields& root)
{
    LiouvilleBoxConfig c;
    {
        Fields d = root.object("domain");
        c.length = d.number("length", c.length, Bound::Positive);
        c.boundary = d.choice("boundary", c.boundary, {"hard-wall", "open", "soft-wall"});
        c.wall_stiffness = d.number("wall_stiffness", c.wall_stiffness, Bound::Positive);
        d.done();
    }
    c.mass = root.number("mass", c.mass, Bound::Positive);
    {
        Fields g = root.object("grid");
        c.nq = g.count("nq", c.nq, 4);
        c.np = g.count("np", c.np, 4);
        c.p_cap = g.number("p_cap", c.p_cap, Bound::Positive);
        g.done();
    }
    {
        Fields i = root.object("initial");
        c.q_mean = i.number("q_mean", c.q_mean);
        c.q_sigma = i.number("q_sigma", c.q_sigma, Bound::Positive);
        c.p_mean = i.number("p_mean", c.p_mean);
        c.p_rms = i.number("p_rms", c.p_rms, Bound::Positive);
        i.done();
    }
    {
        Fields t = root.object("time");
        c.crossings = t.number("crossings", c.crossings, Bound::Positive);
        c.steps = t.count("steps", c.steps, 1);
        t.done();
    }
    c.require_localized = root.flag("require_localized", c.require_localized);
    {
        Fields o = root.object("oracle");
        c.oracle_samples = o.count("samples", c.oracle_samples);
        c.oracle_bins = o.count("bins", c.oracle_bins, 1);
        o.done();
        if (c.oracle_samples > 0 && c.boundary == "soft-wall")
            throw ValidationError(o.at("samples"), "the characteristics oracle needs free flight; set it to 0");
        if (c.oracle_samples > 0 && c.nq % c.oracle_bins != 0)
            throw ValidationError(o.at("bins"), fmt::format("must divide grid.nq = {}", c.nq));
    }
    {
        Fields t = root.object("thresholds");
        c.max_distance = t.number("distance", c.max_distance, Bound::Positive);
        c.max_oracle_gap = t.number("oracle", c.max_oracle_gap, Bound::Positive);
        t.done();
    }
    return c;
}

ScatteringTableConfig scattering_table(Fields& root)
{
    ScatteringTableConfig c;
    {
        Fields p = root.object("potential");
        c.kind = p.choice("kind", c.kind, {"power-law", "hard-sphere"});
        c.potential.coefficient = p.number("coefficient", c.potential.coefficient, Bound::Positive);
        c.potential.exponent = p.number("exponent", c.potential.exponent, Bound::Positive);
        c.potential.scale = p.number("scale", c.potential.scale, Bound::Positive);
        c.diameter = p.number("diameter", c.diameter, Bound::Positive);
        p.done();
    }
    c.mass = root.number("mass", c.mass, Bound::Positive);
    {
        Fields g = root.object("grid");
        c.b_nodes = g.count("b_nodes", c.b_nodes, 2);
        c.g_nodes = g.count("g_nodes", c.g_nodes, 2);
        c.g_min = g.number("g_min", c.g_min, Bound::Positive);
        c.g_max = g.number("g_max", c.g_max, Bound::Positive);
        if (!(c.g_max > c.g_min))
            throw ValidationError(g.at("g_max"), "must exceed g_min");
        g.done();
    }
    c.chi_min = root.number("chi_min", c.chi_min, Bound::Positive);
    c.validation_samples = root.count("validation_samples", c.validation_samples);
    {
        Fields t = root.object("thresholds");
        c.max_midpoint_error = t.number("midpoint_error", c.max_midpoint_error, Bound::Positive);
        t.done();
    }
    return c;
}

BoltzmannRelaxConfig boltzmann_relax(Fields& root)
{
    BoltzmannRelaxConfig c;
    c.potential = power_law(root.object("potential"), c.potential);
    c.mass = root.number("mass", c.mass, Bound::Positive);
    c.density = root.number("density", c.density, Bound::Positive);
    {
        Fields g = root.object("grid");
        c.n = g.count("n", c.n, 4);
        if (c.n % 2)
            throw ValidationError(g.at("n"), "must be even");
        c.p_cap_over_rms = g.number("p_cap_over_rms", c.p_cap_over_rms, Bound::Positive);
        g.done();
    }
    c.initial = mixture(root.object("initial"), c.initial);
    {
        Fields k = root.object("kernel");
        c.kernel_b_nodes = k.count("b_nodes", c.kernel_b_nodes, 2);
        c.kernel_g_nodes = k.count("g_nodes", c.kernel_g_nodes, 2);
        c.chi_min = k.number("chi_min", c.chi_min, Bound::Positive);
        k.done();
    }
    {
        Fields k = root.object("collision");
        c.samples = k.count("samples", c.samples, 2);
        c.interpolation = k.choice("interpolation", c.interpolation, {"cubic-ratio", "trilinear"});
        c.skip_below = k.number("skip_below", c.skip_below, Bound::NonNegative);
        k.done();
    }
    {
        Fields t = root.object("time");
        c.dt = t.number("dt", c.dt, Bound::Positive);
        c.t_final = t.number("t_final", c.t_final, Bound::Positive);
        c.scheme = t.choice("scheme", c.scheme, {"euler", "midpoint"});
        t.done();
    }
    {
        Fields d = root.object("dsmc");
        c.dsmc_particles = d.count("particles", c.dsmc_particles);
        c.dsmc_dt = d.number("dt", c.dsmc_dt, Bound::Positive);
        d.done();
    }
    {
        Fields m = root.object("maxwell_check");
        c.maxwell_steps = m.count("steps", c.maxwell_steps);
        c.maxwell_dt = m.number("dt", c.maxwell_dt, Bound::Positive);
        m.done();
    }
    {
        Fields q = root.object("conservation_check");
        c.conservation_n = q.count("n", c.conservation_n);
        if (c.conservation_n % 2)
            throw ValidationError(q.at("n"), "must be even (0 disables the check)");
        q.done();
    }
    {
        Fields t = root.object("thresholds");
        c.h_confidence = t.number("h_confidence", c.h_confidence, Bound::Unit);
        c.max_terminal_l1 = t.number("terminal_l1", c.max_terminal_l1, Bound::Positive);
        c.max_dsmc_l1 = t.number("dsmc_l1", c.max_dsmc_l1, Bound::Positive);
        c.maxwell_factor = t.number("maxwell_factor", c.maxwell_factor, Bound::Positive);
        c.max_conservation = t.number("conservation", c.max_conservation, Bound::Positive);
        t.done();
    }
    return c;
}

GradSweepConfig grad_sweep(Fields& root)
{
    GradSweepConfig c;
    {
        Fields l = root.object("ladder");
        c.n0 = l.count("n0", c.n0, 2);
        c.mu0 = l.number("mu0", c.mu0, Bound::Positive);
        c.rungs = l.count("rungs", c.rungs, 1);
        c.runs = l.count("runs", c.runs, 1);
        l.done();
    }
    c.potential = power_law(root.object("potential"), c.potential);
    if (c.potential.scale != 1.0)
        throw ValidationError("potential.scale", "the ladder sets mu; leave scale at 1");
    c.momentum = mixture(root.object("momentum"), c.momentum);
    c.mass = root.number("mass", c.mass, Bound::Positive);
    {
        Fields b = root.object("box");
        if (b.has("length") && b.has("mu_over_mean_free_path"))
            throw ValidationError(b.at("length"), "give either length or mu_over_mean_free_path");
        if (b.has("length"))
            c.length = b.number("length", 0.0, Bound::Positive);
        c.mu_over_mean_free_path = b.number("mu_over_mean_free_path", c.mu_over_mean_free_path, Bound::Positive);
        b.done();
    }
    c.checkpoints = root.numbers("checkpoints", c.checkpoints);
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i)
        if (!(c.checkpoints[i] >= 0.0) || (i > 0 && !(c.checkpoints[i] > c.checkpoints[i - 1])))
            throw ValidationError(fmt::format("checkpoints[{}]", i), "checkpoints must be >= 0 and increasing");
    c.dtau = root.number("dtau", c.dtau, Bound::Positive);
    c.cutoff = root.number("cutoff", c.cutoff, Bound::Positive);
    {
        Fields b = root.object("bins");
        c.q_bins = b.triple("q_bins", c.q_bins);
        c.p_bins = b.triple("p_bins", c.p_bins);
        c.p_cap = b.number("p_cap", c.p_cap, Bound::Positive);
        b.done();
    }
    {
        Fields f = root.object("factorization");
        c.factorization_bins = f.count("bins_per_axis", c.factorization_bins, 2);
        c.factorization_momentum_only = f.flag("momentum_only", c.factorization_momentum_only);
        f.done();
    }
    {
        Fields r = root.object("reference");
        c.reference_particles = r.count("particles", c.reference_particles, 1000);
        c.reference_dt = r.number("dt", c.reference_dt, Bound::Positive);
        r.done();
    }
    {
        Fields s = root.object("statistics");
        c.bootstrap = s.count("bootstrap", c.bootstrap, 2);
        c.floor_replicates = s.count("floor_replicates", c.floor_replicates, 2);
        c.confidence = s.number("confidence", c.confidence, Bound::Unit);
        s.done();
    }
    c.control = root.flag("control", c.control);
    c.reversal = root.flag("reversal", c.reversal);
    return c;
}

} // namespace

std::vector<std::string> experiment_kinds()
{
    return {"md-reversal", "liouville-box", "boltzmann-relax", "scattering-table", "grad-sweep"};
}

ExperimentConfig parse_config(const json& j)
{
    Fields root(j, "");
    ExperimentConfig cfg;
    if (!root.has("experiment"))
        throw ValidationError("experiment", "missing; expected one of " + fmt::format("{}", fmt::join(experiment_kinds(), ", ")));
    cfg.kind = root.choice("experiment", "", experiment_kinds());
    if (const json* s = root.get("seed")) {
        if (!s->is_number_unsigned())
            throw ValidationError("seed", "expected a non-negative integer");
        cfg.seed = s->get<std::uint64_t>();
    }
    if (const json* o = root.get("output_dir")) {
        if (!o->is_string() || o->get<std::string>().empty())
            throw ValidationError("output_dir", "expected a non-empty string");
        cfg.output_dir = o->get<std::string>();
    }
    if (cfg.kind == "md-reversal")
        cfg.params = md_reversal(root);
    else if (cfg.kind == "liouville-box")
        cfg.params = liouville_box(root);
    else if (cfg.kind == "scattering-table")
        cfg.params = scattering_table(root);
    else if (cfg.kind == "boltzmann-relax")
        cfg.params = boltzmann_relax(root);
    else
        cfg.params = grad_sweep(root);
    root.done();
    cfg.text = j.dump();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("", fmt::format("cannot read config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("", fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
    ExperimentConfig cfg = parse_config(j);
    cfg.text = text;
    return cfg;
}

} // namespace kinetic::cli
