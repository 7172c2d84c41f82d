#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qtrabi/cache.hpp"
#include "qtrabi/cli.hpp"
#include "qtrabi/errors.hpp"
#include "qtrabi/io.hpp"

using namespace qtrabi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::path(QTRABI_TEST_SCRATCH) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream s(text);
    for (std::string l; std::getline(s, l);) {
        out.push_back(l);
    }
    return out;
}

int run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    return cli::run(args, out, err);
}

}  // namespace

TEST_CASE("number formatting and grid parsing") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(0.1, 15) == "0.1");
    CHECK(io::format_double(-2.0) == "-2");

    const auto r = io::parse_range("0.05:1.5:30");
    REQUIRE(r.size() == 30);
    CHECK(r.front() == 0.05);
    CHECK(r.back() == 1.5);
    CHECK(io::parse_range("2:2:1") == std::vector<double>{2.0});
    for (const char* bad : {"0:1", "0:1:0", "0:1:2.5", "1:0:3", "a:1:3", "0:1:3:4", "0:1:"}) {
        CHECK_THROWS_AS(io::parse_range(bad), InputError);
    }
    CHECK(io::parse_list("500,1000,2000") == std::vector<double>{500.0, 1000.0, 2000.0});
    CHECK_THROWS_AS(io::parse_list("500,,1000"), InputError);
    CHECK_THROWS_AS(io::parse_list(""), InputError);
    CHECK(io::parse_interval("0.5:2.5") == std::pair{0.5, 2.5});
    CHECK_THROWS_AS(io::parse_interval("2:1"), InputError);
}

TEST_CASE("CSV tables") {
    io::CsvTable t({"a", "b", "c"});
    t.row() << 1.0 / 3.0 << 7 << std::string("SR");
    t.row() << 0.5 << -1 << std::string("NP");
    CHECK(t.str() == "a,b,c\n0.33333333333333331,7,SR\n0.5,-1,NP\n");
    CHECK(t.rows() == 2);
}

TEST_CASE("result cache round trip") {
    const auto dir = scratch("cache");
    io::ResultCache cache(dir);
    const solver::SolverConfig cfg;
    PointResult r{};
    r.key = {1.0, 0.1 + 0.2, 500.0};
    r.energy = -500.45768960877956;
    r.cutoff_used = 128;
    r.top_level_weight = 1.25e-17;
    r.residual = 3.1e-11;
    r.parity = -1;
    r.observables = {-1.0009153792175591, 0.0036572925548851287, 0.11312769521934327, 9.1, -0.995, 1e-13};
    cache.store(r, cfg);
    const auto back = cache.load(r.key, cfg);
    REQUIRE(back);
    CHECK(back->energy == r.energy);
    CHECK(back->observables.n_ph == r.observables.n_ph);
    CHECK(back->observables.dp2 == r.observables.dp2);
    CHECK(back->observables.x_avg == r.observables.x_avg);
    CHECK(back->parity == -1);
    CHECK(cache.hits() == 1);

    // 15 significant digits: 0.30000000000000004 and 0.3 share a key.
    CHECK(cache.load({1.0, 0.3, 500.0}, cfg));
    CHECK_FALSE(cache.load({1.0, 0.3000001, 500.0}, cfg));
    solver::SolverConfig other;
    other.eig_tol = 1e-9;
    CHECK_FALSE(cache.load(r.key, other));
    CHECK(cache.misses() == 2);
    CHECK(io::ResultCache::hash_hex("abc").size() == 16);
    CHECK(io::ResultCache::hash_hex("abc") != io::ResultCache::hash_hex("abd"));
    CHECK(canonicalize({0.1 + 0.2, 1.0, 2.0}).gamma == 0.3);

    // A record whose stored key disagrees is a miss, not a wrong answer.
    const auto file = dir / (io::ResultCache::hash_hex(io::ResultCache::canonical_key(r.key, cfg)) + ".json");
    auto j = nlohmann::json::parse(slurp(file));
    j["key"] = "something else";
    std::ofstream(file) << j.dump();
    CHECK_FALSE(cache.load(r.key, cfg));
}

TEST_CASE("cache directory resolution") {
    CHECK(io::resolve_cache_dir("/tmp/x") == fs::path("/tmp/x"));
    ::setenv("QTRABI_CACHE", "/tmp/from-env", 1);
    CHECK(io::resolve_cache_dir("") == fs::path("/tmp/from-env"));
    ::unsetenv("QTRABI_CACHE");
    CHECK(io::resolve_cache_dir("") == fs::path(".qtrabi-cache"));
}

TEST_CASE("cli: usage errors exit with 2") {
    const auto dir = scratch("cli-usage");
    CHECK(run({}) == cli::kExitUsage);
    CHECK(run({"no-such-command"}) == cli::kExitUsage);
    CHECK(run({"--out", dir.string(), "phase-diagram", "--gamma-range", "0:1", "--lambda-range", "0.1:1:3"}) ==
          cli::kExitUsage);
    CHECK(run({"--out", dir.string(), "landau", "--gamma", "0.5", "--lambda", "0.5", "--alpha-range", "0:1:3",
               "--order", "5"}) == cli::kExitUsage);
    CHECK(run({"--help"}) == cli::kExitOk);
}

TEST_CASE("cli: phase diagram") {
    const auto dir = scratch("cli-phase");
    REQUIRE(run({"--out", dir.string(), "phase-diagram", "--gamma-range", "0.05:1.5:30", "--lambda-range",
                 "0.05:1.2:24"}) == 0);
    const auto rows = lines(slurp(dir / "phase_diagram.csv"));
    REQUIRE(rows.size() == 721);
    CHECK(rows[0] == "gamma,lambda,h_avg,alpha_star,phase");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() > 3 && rows[i].substr(rows[i].size() - 3) == ",NP") {
            CHECK(rows[i].find(",-1,0,NP") != std::string::npos);
        }
    }
    const auto q = nlohmann::json::parse(slurp(dir / "qtcp.json"));
    CHECK(q["gamma"].get<double>() == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(q["lambda"].get<double>() == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(lines(slurp(dir / "boundary_second.csv")).front() == "gamma,lambda");
    CHECK(lines(slurp(dir / "boundary_first.csv")).size() > 1);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["command"] == "phase-diagram");
    CHECK(m.contains("timestamp"));
    CHECK(m.contains("tool_version"));
    CHECK(m["solver_config"]["eig_tol"].get<double>() == 1e-10);
}

TEST_CASE("cli: landau landscapes") {
    const auto dir = scratch("cli-landau");
    auto minima = [&](const char* g, const char* l) {
        REQUIRE(run({"--out", dir.string(), "landau", "--gamma", g, "--lambda", l, "--alpha-range", "-2:2:401",
                     "--order", "exact"}) == 0);
        std::vector<std::pair<double, double>> out;
        const auto j = nlohmann::json::parse(slurp(dir / "landau_minima.json"));
        for (const auto& e : j["grid_minima"]) {
            out.emplace_back(e["alpha"].get<double>(), e["energy"].get<double>());
        }
        return out;
    };
    const auto np = minima("0.1", "0.5");
    REQUIRE(np.size() == 1);
    CHECK(np[0].first == doctest::Approx(0.0));
    const auto coexist = minima("0.6", "0.82");
    CHECK(coexist.size() == 3);
    const auto sr = minima("0.8", "0.65");
    REQUIRE(sr.size() == 2);
    CHECK(sr[0].first == doctest::Approx(-sr[1].first));
    CHECK(sr[0].second == doctest::Approx(sr[1].second).epsilon(1e-14));
    CHECK(lines(slurp(dir / "landau.csv")).front() == "alpha,e_exact,e_order2,e_order4,e_order6");
}

TEST_CASE("cli: boundary table") {
    const auto dir = scratch("cli-boundary");
    REQUIRE(run({"--out", dir.string(), "boundary", "--gamma-range", "0.1:1.5:15"}) == 0);
    const auto rows = lines(slurp(dir / "boundary.csv"));
    REQUIRE(rows.size() == 16);
    CHECK(rows[0] == "gamma,lambda,order");
    CHECK(rows[1].substr(rows[1].size() - 6) == ",first");
    CHECK(rows[15] == "1.5,0.33333333333333331,second");
}

TEST_CASE("cli: ed-sweep is deterministic and cache-transparent") {
    const auto dir = scratch("cli-ed");
    const auto cache = dir / "cache";
    auto sweep = [&](const fs::path& out, std::vector<std::string> extra) {
        std::vector<std::string> args{"--out", out.string()};
        args.insert(args.end(), extra.begin(), extra.end());
        for (const char* a : {"ed-sweep", "--gamma", "1", "--lambda-range", "0.3:0.7:5", "--etas", "20,50",
                              "--derivatives", "2"}) {
            args.emplace_back(a);
        }
        return run(args);
    };
    REQUIRE(sweep(dir / "cold", {"--cache", cache.string()}) == 0);
    REQUIRE(sweep(dir / "warm", {"--cache", cache.string()}) == 0);
    REQUIRE(sweep(dir / "nocache", {"--no-cache", "--jobs", "3"}) == 0);
    const auto cold = slurp(dir / "cold" / "ed_sweep.csv");
    CHECK(cold == slurp(dir / "warm" / "ed_sweep.csv"));
    CHECK(cold == slurp(dir / "nocache" / "ed_sweep.csv"));
    CHECK(slurp(dir / "cold" / "ed_sweep_derivatives.csv") == slurp(dir / "warm" / "ed_sweep_derivatives.csv"));
    const auto rows = lines(cold);
    REQUIRE(rows.size() == 11);
    CHECK(rows[0] == "gamma,eta,lambda,lambda_over_lc,e_g_scaled,n_ph,dp2,h_avg,cutoff_used");
    const auto warm = nlohmann::json::parse(slurp(dir / "warm" / "manifest.json"));
    CHECK(warm["cache_hits"].get<int>() == 10);
    CHECK(warm["cache_misses"].get<int>() == 0);
}

TEST_CASE("cli: failing points go to errors.log") {
    const auto dir = scratch("cli-errors");
    const int rc = run({"--out", dir.string(), "--no-cache", "--solver-tol", "1e-300", "ed-sweep", "--gamma", "1",
                        "--lambda-range", "0.5:0.5:1", "--etas", "10"});
    CHECK(rc == cli::kExitFailure);
    const auto log = slurp(dir / "errors.log");
    CHECK(log.find("lambda=0.5") != std::string::npos);
    CHECK(lines(slurp(dir / "ed_sweep.csv")).size() == 1);
}

TEST_CASE("cli: scaling and collapse outputs") {
    const auto dir = scratch("cli-scaling");
    const std::string cache = QTRABI_TEST_CACHE;
    REQUIRE(run({"--out", dir.string(), "--cache", cache, "scaling", "--gamma", "1", "--observable", "dp2", "--etas",
                 "100,200,400", "--collapse-etas", "100,200,400", "--points", "21"}) == 0);
    const auto fit = nlohmann::json::parse(slurp(dir / "loglog_fit.json"));
    CHECK(fit["slope"].get<double>() < 0.0);
    CHECK(fit["points"].get<int>() == 3);
    const auto col = nlohmann::json::parse(slurp(dir / "collapse.json"));
    CHECK(col["nu"].get<double>() > 0.0);
    CHECK(lines(slurp(dir / "collapse.csv")).size() == 64);
    CHECK(lines(slurp(dir / "scaling_sweep.csv")).front() == "gamma,eta,lambda,dp2");

    const auto dir2 = scratch("cli-collapse");
    REQUIRE(run({"--out", dir2.string(), "--cache", cache, "collapse", "--gamma", "1", "--observable", "dp2",
                 "--collapse-etas", "100,200,400", "--points", "21"}) == 0);
    CHECK(slurp(dir2 / "collapse.csv") == slurp(dir / "collapse.csv"));
}
