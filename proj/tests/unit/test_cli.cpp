#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "khan/cli.hpp"
#include "khan/estimators.hpp"
#include "khan/rng.hpp"
#include "khan/simulation.hpp"

namespace fs = std::filesystem;
using namespace khan;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "khan");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "khan_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path ggm_sample(const std::string& name, int triangles, int n, std::uint64_t seed) {
    Rng rng(seed);
    auto m = gen_ggm_model(GgmDesign::table1(triangles, 0, 0), rng);
    auto x = sample_gaussian(m.theta, n, rng);
    std::ostringstream s;
    write_samples_csv(s, x);
    const auto p = scratch(name);
    write(p, s.str());
    return p;
}

}  // namespace

TEST_CASE("help on every subcommand") {
    CHECK(run({"--help"}).code == 0);
    for (const char* sub : {"select", "khan", "simulate", "rank"}) {
        auto r = run({sub, "--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("--") != std::string::npos);
    }
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
}

TEST_CASE("configuration errors exit with 2") {
    const auto data = ggm_sample("cfg.csv", 2, 200, 1);
    CHECK(run({"select", "--data", data.string(), "--shape", "triangle"}).code == 2);
    CHECK(run({"select", "--data", data.string(), "--shape", "triangle", "--q", "1.5"}).code == 2);
    CHECK(run({"select", "--data", data.string(), "--shape", "hexagon", "--q", "0.1"}).code == 2);
    CHECK(run({"select", "--data", data.string(), "--shape", "triangle", "--q", "0.1", "--model", "probit"}).code ==
          2);
    CHECK(run({"select", "--data", (scratch("missing.csv")).string(), "--shape", "triangle", "--q", "0.1"}).code ==
          2);
    CHECK(run({"khan", "--data", data.string(), "--q", "0.1", "--K", "0"}).code == 2);
    CHECK(run({"khan", "--data", data.string(), "--q", "0.1", "--K", "6"}).code == 2);
    CHECK(run({"khan", "--data", data.string(), "--q", "0.1", "--K", "1", "--mu1", "abc"}).code == 2);
    CHECK(run({"khan", "--data", data.string(), "--q", "0.1", "--K", "1", "--mu0", "2", "--mu1", "1"}).code == 2);
    CHECK(run({"simulate", "--preset", "table9"}).code == 2);
    CHECK(run({"simulate", "--preset", "table1", "--d", "210"}).code == 2);
    CHECK(run({"simulate"}).code == 2);
}

TEST_CASE("ising data with a non-binary entry exits with 3") {
    const auto p = scratch("bad_ising.csv");
    write(p, "1,-1,1\n-1,1,1\n1,0,-1\n1,1,1\n");
    auto r = run({"select", "--data", p.string(), "--model", "ising", "--shape", "triangle", "--q", "0.1"});
    CHECK(r.code == 3);
    CHECK(r.err.find("non-±1 entry at row 2, col 1") != std::string::npos);
}

TEST_CASE("select on a small gaussian sample") {
    const auto data = ggm_sample("sel.csv", 3, 2000, 2);
    auto r = run({"select", "--data", data.string(), "--shape", "triangle", "--q", "0.1"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["total_J"] == 84);
    CHECK(j["config"]["d"] == 9);
    CHECK(j["config"]["shape"] == "triangle");
    CHECK(j["selected"].size() >= 1);

    const auto out = scratch("sel.json");
    auto f = run({"select", "--data", data.string(), "--shape", "triangle", "--q", "0.1", "--out", out.string()});
    CHECK(f.code == 0);
    CHECK(f.out.empty());
    CHECK(nlohmann::json::parse(slurp(out)) == j);
}

TEST_CASE("khan with an unbounded range terminates and is reproducible") {
    const auto data = ggm_sample("kh.csv", 2, 1500, 3);
    const auto json = scratch("kh.json"), bars = scratch("kh_bars.csv");
    std::vector<std::string> args{"khan",  "--data",    data.string(), "--q",       "0.1",      "--K", "2",
                                  "--out", json.string(), "--barcode", bars.string()};
    auto a = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out.rfind("jbar ", 0) == 0);
    const std::string first = slurp(bars);
    CHECK(first.rfind("birth,death,multiplicity,censored", 0) == 0);
    auto j = nlohmann::json::parse(slurp(json));
    CHECK(j["mu1"] == "inf");
    CHECK(j["steps"].is_array());

    auto b = run(args);
    CHECK(b.code == 0);
    CHECK(b.out == a.out);
    CHECK(slurp(bars) == first);
}

TEST_CASE("rank subcommand") {
    const auto full = scratch("k5.csv");
    std::string text = "u,v\n";
    for (int u = 0; u < 5; ++u)
        for (int v = u + 1; v < 5; ++v) text += std::to_string(u) + "," + std::to_string(v) + "\n";
    write(full, text);
    auto r = run({"rank", "--edges", full.string(), "--d", "5", "--K", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "10\nZ_1 6\nZ_2 4\n");

    auto j = run({"rank", "--edges", full.string(), "--d", "5", "--K", "2", "--json"});
    REQUIRE(j.code == 0);
    auto parsed = nlohmann::json::parse(j.out);
    CHECK(parsed["rank"] == 10);
    CHECK(parsed["edges"] == 10);

    const auto empty = scratch("empty.csv");
    write(empty, "");
    auto e = run({"rank", "--edges", empty.string(), "--d", "5", "--K", "2"});
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("0\n", 0) == 0);

    CHECK(run({"rank", "--edges", full.string(), "--d", "5", "--K", "5"}).code == 2);
    CHECK(run({"rank", "--edges", full.string(), "--d", "4", "--K", "2"}).code == 3);
}

TEST_CASE("simulate emits a sample and a report") {
    const auto sample = scratch("sim.csv"), truth = scratch("sim_truth.csv");
    auto e = run({"simulate", "--preset", "table2", "--n", "50", "--seed", "4", "--emit-sample", sample.string(),
                  "--emit-truth", truth.string()});
    REQUIRE(e.code == 0);
    auto x = read_samples_file(sample.string());
    CHECK(x.n() == 50);
    CHECK(((x.data.array() == 1.0) || (x.data.array() == -1.0)).all());
    CHECK(!slurp(truth).empty());

    const auto cfg = scratch("sim_cfg.json");
    write(cfg, R"({"model": "ggm", "design": {"flavor": "table1", "m1": 2, "m2": 0, "m3": 0},
                   "n": 300, "reps": 2, "seed": 5, "shapes": ["triangle"], "parallelism": 1})");
    const auto csv = scratch("sim_report.csv");
    auto r = run({"simulate", "--config", cfg.string(), "--csv", csv.string()});
    if (r.code != 0) MESSAGE(r.err);
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["reps"].size() == 2);
    CHECK(slurp(csv).rfind("rep,seed,ok,shape", 0) == 0);
    auto again = nlohmann::json::parse(run({"simulate", "--config", cfg.string()}).out);
    j.erase("wall_seconds");
    again.erase("wall_seconds");
    CHECK(again == j);
}

TEST_CASE("installed binary") {
    const std::string bin = KHAN_CLI_PATH;
    const auto log = scratch("bin_out.txt");
    const std::string quiet = " > " + log.string() + " 2>&1";
    CHECK(std::system((bin + " --help" + quiet).c_str()) == 0);
    const int bad = std::system((bin + " select --shape triangle" + quiet).c_str());
#ifdef WEXITSTATUS
    CHECK(WEXITSTATUS(bad) == 2);
#else
    CHECK(bad != 0);
#endif
}
