#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "qtrabi/errors.hpp"
#include "qtrabi/scaling.hpp"

using namespace qtrabi;
using namespace qtrabi::scaling;

namespace {

// Exact master-curve data: value = eta^(-bon) / (1 + x^2), x = (l - lref) eta^(1/nu).
ScalingDataset synthetic(double nu, double bon, double sample_nu = -1.0) {
    ScalingDataset ds;
    ds.gamma = 1.0;
    ds.lambda_ref = 0.5;
    for (const double eta : {1000.0, 2000.0, 5000.0}) {
        for (const double l : collapse_lambdas(0.5, eta, sample_nu > 0 ? sample_nu : nu, 5.0, 61)) {
            const double x = (l - 0.5) * std::pow(eta, 1.0 / nu);
            ds.rows.push_back({eta, l, std::pow(eta, -bon) / (1.0 + x * x)});
        }
    }
    return ds;
}

PointResult fake_point(const PointKey& key, double value) {
    PointResult r{};
    r.key = key;
    r.cutoff_used = 1;
    r.parity = 1;
    r.observables.n_ph = value;
    r.observables.dp2 = value;
    return r;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::path(QTRABI_TEST_SCRATCH) / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("log-log regression") {
    std::vector<std::pair<double, double>> pts;
    for (const double eta : {500.0, 1000.0, 2000.0, 5000.0}) {
        pts.emplace_back(eta, 3.0 * std::pow(eta, -1.0 / 3.0));
    }
    const auto f = loglog_fit(pts);
    CHECK(f.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.points == 4);
    CHECK(f.eta_min == 500.0);
    CHECK(f.eta_max == 5000.0);

    const auto w = loglog_fit(pts, std::pair{900.0, 6000.0});
    CHECK(w.points == 3);
    CHECK(w.eta_min == 1000.0);

    CHECK_THROWS_AS(loglog_fit(pts, std::pair{900.0, 2500.0}), InputError);
    pts[1].second = 0.0;
    CHECK_THROWS_AS(loglog_fit(pts), DomainError);
}

TEST_CASE("critical exponent from an injected power law") {
    SweepRunner runner(solver::SolverConfig{}, nullptr, 2,
                       [](const PointKey& k, const solver::SolverConfig&) { return fake_point(k, 2.0 * std::pow(k.eta, -0.4)); });
    const auto f = critical_exponent_at(runner, 1.0, Observable::NPh, {100.0, 300.0, 1000.0}, 0.5);
    CHECK(-f.slope == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(runner.solves() == 3);
}

TEST_CASE("sweep runner caching and error tagging") {
    const auto dir = scratch("runner-cache");
    io::ResultCache cache(dir);
    int calls = 0;
    auto solver = [&calls](const PointKey& k, const solver::SolverConfig&) {
        ++calls;
        if (k.lambda > 0.9) {
            throw SolverError("did not converge", 1e-3);
        }
        return fake_point(k, k.lambda * k.eta);
    };
    SweepRunner cold(solver::SolverConfig{}, &cache, 1, solver);
    const auto a = eta_sweep(cold, 1.0, {0.1, 0.2}, {10.0, 20.0}, {Observable::NPh, Observable::DP2}, 0.5);
    REQUIRE(a.size() == 2);
    REQUIRE(a[0].rows.size() == 4);
    CHECK(a[0].rows[1].eta == 20.0);
    CHECK(a[0].rows[1].lambda == 0.1);
    CHECK(cold.solves() == 4);

    SweepRunner warm(solver::SolverConfig{}, &cache, 1, solver);
    const auto b = eta_sweep(warm, 1.0, {0.1, 0.2}, {10.0, 20.0}, {Observable::NPh}, 0.5);
    CHECK(warm.solves() == 0);
    CHECK(b[0].rows[3].value == a[0].rows[3].value);

    try {
        eta_sweep(warm, 1.0, {0.1, 0.95}, {10.0}, {Observable::NPh}, 0.5);
        FAIL("expected PointError");
    } catch (const PointError& e) {
        CHECK(e.lambda() == 0.95);
        CHECK(std::string(e.what()).find("lambda=0.95") != std::string::npos);
    }
    CHECK_THROWS_AS(eta_sweep(warm, 1.0, {0.1}, {20.0, 10.0}, {Observable::NPh}, 0.5), InputError);
}

TEST_CASE("exact diagonalization sweeps") {
    SweepRunner runner(solver::SolverConfig{}, nullptr, 2);
    const auto zero = eta_sweep(runner, 1.0, {0.0}, {10.0, 100.0, 1000.0}, {Observable::NPh}, 0.5);
    for (const auto& r : zero[0].rows) {
        CHECK(r.value == 0.0);
    }
    const auto crit = eta_sweep(runner, 1.0, {0.5}, {100.0, 200.0}, {Observable::DP2}, 0.5);
    CHECK(crit[0].rows[1].value < crit[0].rows[0].value);
}

TEST_CASE("collapse cost on exact master-curve data") {
    const auto ds = synthetic(1.0, 0.5);
    const double truth = collapse_cost(ds, 1.0, 0.5, 5.0);
    CHECK(truth < 1e-12);
    CHECK(collapse_cost(ds, 1.2, 0.5, 5.0) > truth);
    CHECK(collapse_cost(ds, 1.0, 0.6, 5.0) > truth);

    // Normalization removes the overall scale.
    auto scaled = ds;
    for (auto& r : scaled.rows) {
        r.value *= 37.0;
    }
    CHECK(std::abs(collapse_cost(scaled, 1.3, 0.45, 5.0) - collapse_cost(ds, 1.3, 0.45, 5.0)) < 1e-12);

    auto single = ds;
    single.rows.resize(61);
    CHECK_THROWS_AS(collapse_cost(single, 1.0, 0.5, 5.0), InputError);

    ScalingDataset apart;
    apart.lambda_ref = 0.0;
    for (int i = 0; i < 5; ++i) {
        apart.rows.push_back({10.0, 0.1 * i, 1.0});
        apart.rows.push_back({20.0, 10.0 + 0.1 * i, 1.0});
    }
    CHECK_THROWS_AS(collapse_cost(apart, 1.0, 0.0, 1.0), OverlapError);
}

TEST_CASE("collapse fit recovers injected exponents") {
    const auto r = fit_collapse(synthetic(1.0, 0.5), {0.5, 2.5}, {0.1, 0.9}, 5.0);
    CHECK(std::abs(r.nu - 1.0) < 1e-2);
    CHECK(std::abs(r.beta_over_nu - 0.5) < 1e-2);
    CHECK_FALSE(r.range_warning);

    // Sampled on a grid built for a different nu.
    const auto s = fit_collapse(synthetic(1.5, 1.0 / 3.0, 1.2), {0.5, 2.5}, {0.1, 0.9}, 5.0);
    CHECK(std::abs(s.nu - 1.5) < 1e-2);
    CHECK(std::abs(s.beta_over_nu - 1.0 / 3.0) < 1e-2);

    const auto edge = fit_collapse(synthetic(1.0, 0.5), {1.2, 2.5}, {0.1, 0.9}, 5.0);
    CHECK(edge.range_warning);
}

TEST_CASE("collapse sampling grid") {
    const auto l = collapse_lambdas(0.5, 1000.0, 1.0, 5.0, 61);
    REQUIRE(l.size() == 61);
    CHECK(l.front() == doctest::Approx(0.49));
    CHECK(l[30] == 0.5);
    CHECK(l.back() == doctest::Approx(0.51));
    CHECK(collapse_lambdas(0.001, 1.0, 1.0, 5.0, 11).size() == 6);
    CHECK_THROWS_AS(collapse_lambdas(0.5, 1000.0, 1.0, 5.0, 1), InputError);
}

TEST_CASE("observable labels") {
    CHECK(parse_observable("nph") == Observable::NPh);
    CHECK(parse_observable("n_ph") == Observable::NPh);
    CHECK(parse_observable("dp2") == Observable::DP2);
    CHECK(to_string(Observable::DP2) == "dp2");
    CHECK_THROWS_AS(parse_observable("eg"), InputError);
}

TEST_CASE("pseudo-critical coupling is the dp2 minimum") {
    SweepRunner runner(solver::SolverConfig{}, nullptr, 1, [](const PointKey& k, const solver::SolverConfig&) {
        return fake_point(k, 1.0 + (k.lambda - 0.47) * (k.lambda - 0.47));
    });
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) {
        grid.push_back(0.4 + 0.01 * i);
    }
    CHECK(pseudo_critical_coupling(runner, 1.0, 100.0, grid) == doctest::Approx(0.47).epsilon(1e-12));
}

TEST_CASE("critical sweeps at gamma = 1") {
    io::ResultCache cache(QTRABI_TEST_CACHE);
    SweepRunner runner(solver::SolverConfig{}, &cache, 2);

    SUBCASE("dp2 slope is stable when the smallest eta is dropped") {
        const auto full = critical_exponent_at(runner, 1.0, Observable::DP2, {500.0, 1000.0, 2000.0, 5000.0}, 0.5);
        const auto tail = critical_exponent_at(runner, 1.0, Observable::DP2, {1000.0, 2000.0, 5000.0}, 0.5);
        CHECK(std::abs(full.slope - tail.slope) < 0.03);
    }
    SUBCASE("dp2 collapses better at nu = 3/2 than at nu = 1") {
        std::vector<std::pair<double, double>> pts;
        for (const double eta : {1000.0, 2000.0, 5000.0}) {
            for (const double l : collapse_lambdas(0.5, eta, 1.5, 5.0, 61)) {
                pts.emplace_back(eta, l);
            }
        }
        const auto ds = eta_sweep(runner, 1.0, pts, {Observable::DP2}, 0.5).front();
        CHECK(collapse_cost(ds, 1.5, 1.0 / 3.0, 5.0) < collapse_cost(ds, 1.0, 1.0 / 3.0, 5.0));
    }
}
