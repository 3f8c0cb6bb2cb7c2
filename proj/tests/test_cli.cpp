// End-to-end checks of the CLI: exit codes, artifact schemas, config files
// and byte-level determinism. The binary path arrives as argv[1].
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_bin;
namespace fs = std::filesystem;

int run(const std::string& args) {
    const int rc = std::system((g_bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("classify exits 0 and reports the verdict") {
    CHECK(run("classify --manifold euclidean:n=2 --p 2 --out cli_t1") == 0);
    const auto rep = slurp("cli_t1/report.json");
    CHECK(rep.find("\"schema\": 1") != std::string::npos);
    CHECK(rep.find("parabolic") != std::string::npos);
}

TEST_CASE("input errors exit 1") {
    CHECK(run("classify --manifold sphere:n=2 --p 2 --out cli_t2") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("classify --manifold euclidean:n=2 --p 0.5 --out cli_t2") == 1);
}

TEST_CASE("failed constructions exit 2 with a named failure") {
    CHECK(run("khasminskii --manifold euclidean:n=3 --p 2 --rmax 8 --grid 128 "
              "--out cli_t3") == 2);
    const auto rep = slurp("cli_t3/failure.json");
    CHECK(rep.find("grid-too-small") != std::string::npos);
}

TEST_CASE("fixed seeds give byte-identical artifacts") {
    CHECK(run("lemma-star --trials 20000 --unit-trials 2000 --seed 42 --out cli_d1") == 0);
    CHECK(run("lemma-star --trials 20000 --unit-trials 2000 --seed 42 --out cli_d2") == 0);
    CHECK(slurp("cli_d1/report.json") == slurp("cli_d2/report.json"));
    CHECK(!slurp("cli_d1/report.json").empty());

    CHECK(run("capacity --manifold euclidean:n=2 --p 2 --rmax 2 --grid 1024 "
              "--out cli_d3") == 0);
    CHECK(run("capacity --manifold euclidean:n=2 --p 2 --rmax 2 --grid 1024 "
              "--out cli_d4") == 0);
    CHECK(slurp("cli_d3/decay.csv") == slurp("cli_d4/decay.csv"));
    CHECK(slurp("cli_d3/report.json") == slurp("cli_d4/report.json"));
    // the reported condenser value sits within half a percent of the model
    const auto rep = slurp("cli_d3/report.json");
    const auto pos = rep.find("\"relative_error\": ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(rep.substr(pos + 18)) < 0.005);
}

TEST_CASE("config file keys with flag overrides") {
    {
        std::ofstream cfg("cli_cfg.ini");
        cfg << "manifold=euclidean:n=3\n";
        cfg << "p=2\n";
        cfg << "out=cli_t5\n";
    }
    CHECK(run("classify --config cli_cfg.ini") == 0);
    CHECK(slurp("cli_t5/report.json").find("nonparabolic") != std::string::npos);
    // flag overrides the config value
    CHECK(run("classify --config cli_cfg.ini --p 3 --out cli_t6") == 0);
    CHECK(slurp("cli_t6/report.json").find("\"verdict\": \"parabolic\"") !=
          std::string::npos);
}

TEST_CASE("khasminskii writes a replayable transcript that audits clean") {
    CHECK(run("khasminskii --manifold euclidean:n=2 --p 2 --rmax 2.4e8 --grid 480 "
              "--steps 2 --witness radial --out cli_t7") == 0);
    CHECK(slurp("cli_t7/report.json").find("\"stages\"") != std::string::npos);
    CHECK(fs::exists("cli_t7/nodes.csv"));
    CHECK(run("audit --run cli_t7 --out cli_t7a") == 0);
    CHECK(slurp("cli_t7a/audit.json").find("\"pass\": true") != std::string::npos);
}

TEST_CASE("evans emits the asymptotics table") {
    CHECK(run("evans --manifold euclidean:n=2 --p 2 --rmax 150 --grid 64 --mtheta 16 "
              "--steps 5 --tlist 1,2,4 --arc 0.5 --out cli_t8") == 0);
    const auto csv = slurp("cli_t8/asymptotics.csv");
    CHECK(csv.find("t,capacity,normalized") == 0);
    CHECK(run("evans --manifold euclidean:n=2 --p 2 --rmax 150 --grid 64 --mtheta 16 "
              "--steps 5 --tlist 1,2,4 --arc 0.5 --out cli_t8b") == 0);
    CHECK(slurp("cli_t8b/asymptotics.csv") == csv);
}

int main(int argc, char** argv) {
    if (argc > 1) g_bin = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
