#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "darkspace/cli/config.hpp"
#include "darkspace/cli/output.hpp"
#include "darkspace/cli/runner.hpp"

using namespace darkspace;
using namespace darkspace::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("darkspace-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "darkspace");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t count_files(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    return std::size_t(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

}  // namespace

TEST_CASE("parse_config") {
    const auto j = nlohmann::json::parse(R"({
        "experiment": "sweep",
        "gammaT": [100, 200, 400],
        "protocol": {"theta": {"family": "linear", "winding": 1}, "phi": {"family": "constant"}},
        "initial": {"bloch": [0, 1, 0]},
        "tolerances": {"rtol": 1e-8},
        "output": {"dir": "out", "prefix": "run1", "gnuplot": true},
        "seed": 7
    })");
    RunConfig cfg = parse_config(j);
    CHECK(cfg.experiment == Experiment::Sweep);
    CHECK(cfg.gamma_t == std::vector<double>{100, 200, 400});
    CHECK(cfg.n0.y == 1.0);
    CHECK(cfg.rtol == 1e-8);
    CHECK(cfg.prefix == "run1");
    CHECK(cfg.gnuplot);
    CHECK(cfg.seed == 7);
    CHECK_NOTHROW(validate(cfg));

    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"gamaT": 100})")), ValidationError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"experiment": "bogus"})")), ValidationError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"initial": {"bloch": [1, 1, 0]}})")),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"protocol": {"theta": {"winding": 1.5}}})")),
                    ValidationError);
}

TEST_CASE("validate") {
    RunConfig cfg;
    cfg.experiment = Experiment::Sweep;
    cfg.gamma_t = {100, 200};
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg.gamma_t = {100, 200, 300};
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg.gamma_t = {100, 50, 400};
    CHECK_THROWS_AS(validate(cfg), ValidationError);

    RunConfig single;
    single.gamma_t = {5.0};
    CHECK_NOTHROW(validate(single));
    CHECK(single.warnings.size() == 1);
    single.gamma_t = {-1.0};
    CHECK_THROWS_AS(validate(single), ValidationError);
    single.gamma_t = {100.0};
    single.prefix = "../escape";
    CHECK_THROWS_AS(validate(single), ValidationError);
    single.prefix = "";
    single.rtol = 0.0;
    CHECK_THROWS_AS(validate(single), ValidationError);
}

TEST_CASE("parse_number_list") {
    CHECK(parse_number_list("100,200, 400") == std::vector<double>{100, 200, 400});
    CHECK_THROWS_AS(parse_number_list("1,x"), ValidationError);
    CHECK_THROWS_AS(parse_number_list(""), ValidationError);
}

TEST_CASE("matrix_from_json") {
    const auto m = matrix_from_json(nlohmann::json::parse("[[1, [0, 1]], [[0, -1], 2]]"));
    CHECK(m(0, 1) == Complex(0.0, 1.0));
    CHECK(m(1, 1) == Complex(2.0));
    CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1, 2], [3]]")), ValidationError);
}

TEST_CASE("output helpers") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5e-12) == "-2.5e-12");
    CsvTable t({"a", "b"});
    t.add_row({1.0, 0.5});
    CHECK(t.str() == "a,b\n1,0.5\n");
    CHECK_THROWS_AS(t.add_row({1.0}), Error);

    TempDir dir;
    write_atomic(dir.path, "x.txt", "hello");
    CHECK(slurp(dir.path / "x.txt") == "hello");
    write_atomic(dir.path, "x.txt", "again");
    CHECK(slurp(dir.path / "x.txt") == "again");
    CHECK(count_files(dir.path) == 1);
}

TEST_CASE("spin32-purity writes deterministic artifacts") {
    TempDir dir;
    const std::vector<std::string> args = {"spin32-purity", "--gammaT", "20", "--checkpoints", "4",
                                           "--output-dir", dir.path.string(), "--gnuplot"};
    const Result r1 = run_cli(args);
    REQUIRE_MESSAGE(r1.code == kExitOk, r1.err);
    const fs::path csv = dir.path / "spin32-purity_trajectory.csv";
    REQUIRE(fs::exists(csv));
    CHECK(fs::exists(dir.path / "spin32-purity.json"));
    const std::string first = slurp(csv);
    CHECK(first.rfind("tau,purity,trace,min_eig,nx,ny,nz,td_effective\n", 0) == 0);
    // header, tau = 0 and four checkpoints
    CHECK(std::count(first.begin(), first.end(), '\n') == 6);

    const Result r2 = run_cli(args);
    REQUIRE(r2.code == kExitOk);
    CHECK(slurp(csv) == first);

    const auto report = nlohmann::json::parse(slurp(dir.path / "spin32-purity.json"));
    CHECK(report.contains("schema_version"));
}

TEST_CASE("invalid input writes nothing") {
    TempDir dir;
    const fs::path out = dir.path / "out";
    const fs::path cfg = dir.path / "bad.json";
    write_file(cfg, R"({"experiment": "spin32-purity", "gammaT": 100, "unknown_key": 1})");
    Result r = run_cli({"run", "--config", cfg.string(), "--output-dir", out.string()});
    CHECK(r.code == kExitValidation);
    CHECK_FALSE(r.err.empty());
    CHECK(count_files(out) == 0);

    write_file(cfg, "");
    r = run_cli({"run", "--config", cfg.string(), "--output-dir", out.string()});
    CHECK(r.code == kExitValidation);
    CHECK(count_files(out) == 0);

    r = run_cli({"run"});
    CHECK(r.code == kExitValidation);
    r = run_cli({"sweep", "--gammaT", "100,200", "--output-dir", out.string()});
    CHECK(r.code == kExitValidation);
    CHECK(count_files(out) == 0);
}

TEST_CASE("output directory precedence") {
    TempDir dir;
    const fs::path from_cfg = dir.path / "cfg";
    const fs::path from_env = dir.path / "env";
    const fs::path from_flag = dir.path / "flag";
    const fs::path cfg = dir.path / "c.json";
    write_file(cfg, R"({"experiment": "spin32-purity", "gammaT": 20, "checkpoints": 2, "output": {"dir": ")" +
                        from_cfg.string() + R"("}})");

    ::unsetenv("DARKSPACE_OUTPUT_DIR");
    CHECK(run_cli({"run", "--config", cfg.string()}).code == kExitOk);
    CHECK(count_files(from_cfg) > 0);

    ::setenv("DARKSPACE_OUTPUT_DIR", from_env.string().c_str(), 1);
    CHECK(run_cli({"run", "--config", cfg.string()}).code == kExitOk);
    CHECK(count_files(from_env) > 0);

    CHECK(run_cli({"run", "--config", cfg.string(), "--output-dir", from_flag.string()}).code == kExitOk);
    CHECK(count_files(from_flag) > 0);
    ::unsetenv("DARKSPACE_OUTPUT_DIR");
}

TEST_CASE("check subcommand") {
    TempDir dir;
    SUBCASE("a single criterion passes") {
        const Result r = run_cli({"check", "--only", "4", "--json"});
        CHECK(r.code == kExitOk);
        const auto j = nlohmann::json::parse(r.out);
        REQUIRE(j["criteria"].size() == 1);
        CHECK(j["criteria"][0]["id"] == 4);
        CHECK(j["criteria"][0]["pass"] == true);
    }
    SUBCASE("an impossible fixture fails with exit 3") {
        const fs::path fx = dir.path / "fx.json";
        write_file(fx, R"({"holonomy_tol": 1e-30})");
        const Result r = run_cli({"check", "--only", "4", "--fixture", fx.string()});
        CHECK(r.code == kExitCheckFailed);
        CHECK(r.out.find("FAIL") != std::string::npos);
    }
    SUBCASE("unknown fixture keys are rejected") {
        const fs::path fx = dir.path / "fx.json";
        write_file(fx, R"({"holonomy_tolerance": 1e-30})");
        CHECK(run_cli({"check", "--only", "4", "--fixture", fx.string()}).code == kExitValidation);
    }
    SUBCASE("out of range criterion") {
        CHECK(run_cli({"check", "--only", "12"}).code == kExitValidation);
    }
}

TEST_CASE("installed binary") {
    TempDir dir;
    const std::string cmd = std::string(DARKSPACE_CLI_PATH) + " gauge-check --gammaT 20 --profile static " +
                            "--output-dir " + dir.path.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir.path / "gauge-check.json"));

    const std::string bad = std::string(DARKSPACE_CLI_PATH) + " spin32-purity --gammaT abc > /dev/null 2>&1";
    const int bad_status = std::system(bad.c_str());
    REQUIRE(WIFEXITED(bad_status));
    CHECK(WEXITSTATUS(bad_status) == 1);
}
