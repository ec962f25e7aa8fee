#include "doctest.h"

#include "kinetic/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <unistd.h>

using namespace kinetic::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path source_dir = KINETIC_SOURCE_DIR;

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("kinetic_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

RunOutcome run_file(const fs::path& config, const fs::path& out, int threads = 0)
{
    RunOptions opt;
    opt.out = out;
    opt.threads = threads;
    opt.config_path = config;
    return run(load_config(config), opt);
}

std::string path_of_error(const json& j)
{
    try {
        parse_config(j);
    } catch (const ValidationError& e) {
        return e.path();
    }
    return "<accepted>";
}

int tool(const std::string& args)
{
    const std::string cmd = std::string(KINETIC_TOOL) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("every shipped config parses")
{
    for (const auto* dir : {"configs", "configs/quick"})
        for (const auto& e : fs::directory_iterator(source_dir / dir))
            if (e.path().extension() == ".json") {
                CAPTURE(e.path().string());
                const auto cfg = load_config(e.path());
                CHECK(!cfg.kind.empty());
                CHECK(cfg.text == slurp(e.path()));
            }
    CHECK(experiment_kinds().size() == 5);
}

TEST_CASE("validation names the offending field")
{
    json j = {{"experiment", "scattering-table"}, {"potential", {{"exponent", -4.0}}}};
    CHECK(path_of_error(j) == "potential.exponent");
    j = {{"experiment", "md-reversal"}, {"integrator", {{"dt", 1e-4}, {"stepz", 3}}}};
    CHECK(path_of_error(j) == "integrator.stepz");
    j = {{"experiment", "md-reversal"}, {"colour", "red"}};
    CHECK(path_of_error(j) == "colour");
    j = {{"experiment", "nope"}};
    CHECK(path_of_error(j) == "experiment");
    j = {{"experiment", "liouville-box"}, {"grid", {{"nq", 2.5}}}};
    CHECK(path_of_error(j) == "grid.nq");
    j = {{"experiment", "boltzmann-relax"}, {"grid", {{"n", 13}}}};
    CHECK(path_of_error(j) == "grid.n");
    j = {{"experiment", "md-reversal"}, {"seed", -1}};
    CHECK(path_of_error(j) == "seed");
    CHECK(path_of_error({{"experiment", "md-reversal"}}) == "<accepted>");

    try {
        parse_config({{"experiment", "scattering-table"}, {"potential", {{"exponent", -4.0}}}});
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("potential.exponent") == 0);
    }
}

TEST_CASE("malformed config: exit 1 and no outputs")
{
    const fs::path dir = scratch("bad");
    fs::create_directories(dir);
    const fs::path cfg = dir / "bad.json";
    std::ofstream(cfg) << R"({"experiment": "scattering-table", "potential": {"exponent": -4}})";
    const fs::path out = dir / "out";
    CHECK(tool("run " + cfg.string() + " --out " + out.string()) == Validation);
    CHECK_FALSE(fs::exists(out));
    CHECK(tool("validate " + cfg.string()) == Validation);
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(tool("validate " + (dir / "broken.json").string()) == Validation);
    CHECK(tool("validate " + (source_dir / "configs/md-reversal.json").string()) == Success);
}

TEST_CASE("md-reversal default config")
{
    const fs::path out = scratch("md");
    const auto res = run_file(source_dir / "configs/md-reversal.json", out);
    CHECK(res.exit_code == Success);
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    const auto s = read_json(out / "summary.json");
    CHECK(s["reversal_error"].get<double>() < 1e-6);
    CHECK(s["energy_drift"].get<double>() < 1e-6);
}

TEST_CASE("manifest lists every output with its hash")
{
    const fs::path out = scratch("manifest");
    const fs::path cfg = source_dir / "configs/quick/liouville-box.json";
    const auto res = run_file(cfg, out);
    REQUIRE(res.exit_code == Success);
    const auto m = read_json(out / "manifest.json");
    CHECK(m["status"] == "complete");
    CHECK(m["partial"] == false);
    CHECK(m["config_sha256"] == sha256_hex(slurp(cfg)));
    CHECK(m["seed"] == 3);
    for (const auto* k : {"versions", "wall_time_s", "started_utc", "threads"})
        CHECK(m.contains(k));
    std::size_t listed = 0;
    for (const auto& f : m["files"]) {
        const fs::path p = out / f["path"].get<std::string>();
        CHECK(f["sha256"] == sha256_file(p));
        CHECK(f["bytes"].get<std::uint64_t>() == fs::file_size(p));
        ++listed;
    }
    std::size_t present = 0;
    for (const auto& e : fs::directory_iterator(out))
        if (e.path().filename() != "manifest.json")
            ++present;
    CHECK(listed == present);
}

TEST_CASE("same config and seed: byte-identical artifacts, any thread count")
{
    for (const auto* kind : {"md-reversal", "liouville-box", "scattering-table", "boltzmann-relax", "grad-sweep"}) {
        CAPTURE(kind);
        const fs::path cfg = source_dir / "configs/quick" / (std::string(kind) + ".json");
        const auto a = run_file(cfg, scratch(std::string(kind) + "_a"));
        const auto b = run_file(cfg, scratch(std::string(kind) + "_b"), 1);
        REQUIRE(a.files == b.files);
        CHECK(a.exit_code == b.exit_code);
        for (const auto& f : a.files)
            CHECK(sha256_file(a.directory / f) == sha256_file(b.directory / f));
    }
}

TEST_CASE("--seed changes the stochastic artifacts and is recorded")
{
    const fs::path cfg = source_dir / "configs/quick/md-reversal.json";
    RunOptions opt;
    opt.out = scratch("seed7");
    opt.seed = 7;
    const auto a = run(load_config(cfg), opt);
    const auto b = run_file(cfg, scratch("seed_default"));
    CHECK(sha256_file(a.directory / "trace.csv") != sha256_file(b.directory / "trace.csv"));
    const auto m = read_json(a.directory / "manifest.json");
    CHECK(m["seed"] == 7);
    CHECK(m["seed_source"] == "--seed");
}

TEST_CASE("threshold failure exits 3, runtime failure exits 2")
{
    auto j = json::parse(slurp(source_dir / "configs/quick/liouville-box.json"));
    j["thresholds"]["distance"] = 1e-9;
    auto cfg = parse_config(j);
    RunOptions opt;
    opt.out = scratch("threshold");
    const auto t = run(cfg, opt);
    CHECK(t.exit_code == Threshold);
    CHECK(t.failed_checks.size() == 1);

    j = json::parse(slurp(source_dir / "configs/quick/boltzmann-relax.json"));
    j["time"]["dt"] = 1e3;
    j["time"]["t_final"] = 2e3;
    cfg = parse_config(j);
    opt.out = scratch("runtime");
    const auto r = run(cfg, opt);
    CHECK(r.exit_code == Runtime);
    const auto m = read_json(*opt.out / "manifest.json");
    CHECK(m["status"] == "failed");
    CHECK(m["partial"] == true);
    CHECK(m["error"]["module"] == "boltzmann");
}

TEST_CASE("output directory resolution")
{
    auto cfg = load_config(source_dir / "configs/quick/md-reversal.json");
    RunOptions opt;
    opt.config_path = "some/where/md-reversal.json";
    ::unsetenv("KINETIC_OUTPUT_DIR");
    CHECK(output_directory(cfg, opt) == fs::path("runs") / "md-reversal");
    ::setenv("KINETIC_OUTPUT_DIR", "/tmp/elsewhere", 1);
    CHECK(output_directory(cfg, opt) == fs::path("/tmp/elsewhere") / "md-reversal");
    cfg.output_dir = "/tmp/from-config";
    CHECK(output_directory(cfg, opt) == fs::path("/tmp/from-config"));
    opt.out = "/tmp/from-flag";
    CHECK(output_directory(cfg, opt) == fs::path("/tmp/from-flag"));
    ::unsetenv("KINETIC_OUTPUT_DIR");
}

TEST_CASE("sha256")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("plots: values are the CSV text, empty dirs warn")
{
    const fs::path dir = scratch("plot");
    fs::create_directories(dir);
    std::ofstream(dir / "h_trace.csv") << "t,H,mass\n0,-4.25,1\n0.5,-4.3,1\n1,-4.31,1\n";
    std::ofstream(dir / "trend.csv") << "rung,N,mu,t,D\n0,250,1,0,0.1\n0,250,1,1,0.2\n1,1000,0.5,0,0.05\n1,1000,0.5,1,0.1\n";
    const auto res = plot_directory(dir);
    CHECK(res.warnings.empty());
    REQUIRE(res.written.size() == 2);

    const std::string h = slurp(dir / "h_trace.svg");
    std::regex pt(R"re(data-x="([^"]*)" data-y="([^"]*)")re");
    std::vector<std::pair<std::string, std::string>> got;
    for (std::sregex_iterator it(h.begin(), h.end(), pt), end; it != end; ++it)
        got.emplace_back((*it)[1], (*it)[2]);
    const std::vector<std::pair<std::string, std::string>> want{{"0", "-4.25"}, {"0.5", "-4.3"}, {"1", "-4.31"}};
    CHECK(got == want);

    const std::string t = slurp(dir / "trend.svg");
    std::size_t series = 0;
    for (auto p = t.find("data-series="); p != std::string::npos; p = t.find("data-series=", p + 1))
        ++series;
    CHECK(series == 2);

    const fs::path empty = scratch("empty");
    fs::create_directories(empty);
    const auto e = plot_directory(empty);
    CHECK(e.written.empty());
    CHECK(e.warnings.size() == 1);
    CHECK(fs::is_empty(empty));
}
