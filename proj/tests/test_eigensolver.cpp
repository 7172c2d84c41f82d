#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qtrabi/eigensolver.hpp"
#include "qtrabi/errors.hpp"
#include "qtrabi/meanfield.hpp"

using namespace qtrabi;
using namespace qtrabi::solver;
using model::ModelParams;
using model::OperatorMatrix;
using model::TruncatedHilbert;

TEST_CASE("small analytic eigenpairs") {
    SolverConfig cfg;
    OperatorMatrix diag(3);
    diag.set(0, 0, 3.0);
    diag.set(1, 1, -1.0);
    diag.set(2, 2, 2.0);
    const auto a = lowest_eigenpair(diag, cfg);
    CHECK(a.value == -1.0);
    CHECK(a.vector(1) == doctest::Approx(1.0));
    CHECK(a.vector(0) == 0.0);

    OperatorMatrix flip(2);
    flip.set(1, 0, 1.0);
    const auto b = lowest_eigenpair(flip, cfg);
    CHECK(b.value == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(b.vector(0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(b.vector(0) * b.vector(1) < 0.0);

    CHECK_THROWS_AS(lowest_eigenpair(OperatorMatrix(0), cfg), ShapeError);
}

TEST_CASE("Lanczos matches a dense oracle on a random symmetric matrix") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    const std::size_t n = 500;
    OperatorMatrix m(n);
    Eigen::MatrixXd dense(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = nd(rng);
            m.set(i, j, v);
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            dense(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    SolverConfig cfg;
    cfg.dense_threshold = 10;
    const auto it = lowest_eigenpair(m, cfg);
    const double ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense, Eigen::EigenvaluesOnly).eigenvalues()(0);
    CHECK(std::abs(it.value - ref) < 1e-9);
    CHECK(it.residual <= cfg.eig_tol);
    CHECK(it.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));

    cfg.max_matvecs = 5;
    try {
        lanczos_lowest(m, cfg);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.best_residual() > 0.0);
    }
}

TEST_CASE("config validation") {
    SolverConfig cfg;
    cfg.eig_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = SolverConfig{};
    cfg.initial_cutoff = 100;
    cfg.max_cutoff = 50;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("decoupled limit") {
    const auto gs = converged_ground_state(ModelParams(10.0, 0.0, 1.0), SolverConfig{});
    CHECK(gs.energy == -10.0);
    CHECK(gs.cutoff_used == SolverConfig{}.initial_cutoff);
    CHECK(gs.vector(static_cast<Eigen::Index>(TruncatedHilbert::index(0, 2))) == doctest::Approx(1.0));
    CHECK(gs.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gs.parity == 1);
}

TEST_CASE("critical point at eta = 100 against an oversized dense oracle") {
    const SolverConfig cfg;
    const auto gs = converged_ground_state(ModelParams(100.0, 0.5, 1.0), cfg);
    const auto ref = oracle::dense_ground(100.0, 0.5, 1.0, 4 * gs.cutoff_used);
    CHECK(std::abs(gs.energy - ref.energy) <= 1e-9 * std::abs(ref.energy));
    CHECK(gs.residual <= cfg.eig_tol);
    CHECK(gs.top_level_weight <= cfg.trunc_tol);
    CHECK(gs.energy_change < cfg.energy_tol);
    CHECK(std::abs(gs.vector.norm() - 1.0) < 1e-12);
}

TEST_CASE("frozen ground energies") {
    // Independent high-cutoff diagonalizations; the bound is the cutoff
    // convergence tolerance, not machine precision.
    const SolverConfig cfg;
    const auto a = converged_ground_state(ModelParams(500.0, 0.5, 1.0), cfg);
    CHECK(a.energy == doctest::Approx(-500.45768960877956).epsilon(1e-12));
    const auto b = converged_ground_state(ModelParams(5000.0, 0.5, 1.0), cfg);
    CHECK(b.energy == doctest::Approx(-5000.480444586727).epsilon(1e-12));
    const auto c = converged_ground_state(ModelParams(5000.0, meanfield::kInvSqrt2, meanfield::kInvSqrt2), cfg);
    CHECK(c.energy == doctest::Approx(-5000.495168928728).epsilon(1e-12));
}

TEST_CASE("the lower parity sector is returned") {
    // Deep in the superradiant phase the two sectors form a near-degenerate doublet.
    const ModelParams p(2.0, 1.9, 2.5);
    const auto gs = converged_ground_state(p, SolverConfig{});
    const auto ref = oracle::dense_ground(2.0, 1.9, 2.5, 4 * gs.cutoff_used);
    CHECK(gs.energy == doctest::Approx(ref.energy).epsilon(1e-12));
    GroundStateOptions even;
    even.parity = 1;
    GroundStateOptions odd;
    odd.parity = -1;
    const double e_even = converged_ground_state(p, SolverConfig{}, even).energy;
    const double e_odd = converged_ground_state(p, SolverConfig{}, odd).energy;
    CHECK(gs.energy == std::min(e_even, e_odd));
    CHECK(gs.parity == (e_odd < e_even ? -1 : 1));
    CHECK(std::abs(e_odd - e_even) < 1e-9 * std::abs(e_even));
}

TEST_CASE("normal phase has few photons") {
    const auto gs = converged_ground_state(ModelParams(500.0, 0.25, 1.0), SolverConfig{});
    const auto q = model::quadrature_operators(gs.hilbert());
    // <a^dag a> = (<X^2> + <P^2> - 2) / 4.
    const std::span<const double> v(gs.vector.data(), static_cast<std::size_t>(gs.vector.size()));
    const double n = (q.x2.expectation(v) + q.p2.expectation(v) - 2.0) / 4.0;
    CHECK(n / 500.0 < 1e-2);
}

TEST_CASE("energy is a variational bound and decreases with the cutoff") {
    for (const auto& [g, l, eta] : {std::tuple{1.0, 0.7, 50.0}, std::tuple{0.3, 1.3, 20.0},
                                    std::tuple{0.7071, 0.72, 200.0}, std::tuple{1.5, 0.2, 30.0}}) {
        const ModelParams p(eta, l, g);
        const auto gs = converged_ground_state(p, SolverConfig{});
        const double mf = eta * meanfield::minimize_mf(l, g).energy;
        CHECK(gs.energy <= mf + 1e-9 * eta);

        double previous = std::numeric_limits<double>::infinity();
        for (const int nc : {8, 16, 32, 64, 128}) {
            const double e = ground_state_at(p, TruncatedHilbert(nc), SolverConfig{}).energy;
            CHECK(e <= previous + 1e-12 * std::abs(e));
            previous = e;
        }
    }
}

TEST_CASE("solves are deterministic") {
    const ModelParams p(300.0, 0.55, 1.0);
    const auto a = converged_ground_state(p, SolverConfig{});
    const auto b = converged_ground_state(p, SolverConfig{});
    CHECK(a.energy == b.energy);
    CHECK((a.vector - b.vector).norm() == 0.0);
}

TEST_CASE("truncation failure carries diagnostics") {
    SolverConfig cfg;
    cfg.initial_cutoff = 4;
    cfg.max_cutoff = 8;
    try {
        converged_ground_state(ModelParams(50.0, 1.0, 1.0), cfg);
        FAIL("expected TruncationError");
    } catch (const TruncationError& e) {
        CHECK(e.last_cutoff() == 8);
        CHECK(e.last_top_weight() > cfg.trunc_tol);
    }
}

TEST_CASE("displaced frame agrees with the plain basis") {
    const ModelParams p(20.0, 1.0, 1.0);
    const auto plain = converged_ground_state(p, SolverConfig{});
    GroundStateOptions opts;
    const double alpha = meanfield::minimize_mf(1.0, 1.0).alpha_star;
    opts.displacement = alpha * std::sqrt(20.0) / 2.0;
    const auto shifted = converged_ground_state(p, SolverConfig{}, opts);
    CHECK(shifted.parity == 0);
    CHECK(std::abs(shifted.energy - plain.energy) <= 1e-9 * std::abs(plain.energy));
    CHECK(shifted.cutoff_used <= plain.cutoff_used);
}
