#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtrabi/cache.hpp"
#include "qtrabi/eigensolver.hpp"
#include "qtrabi/point.hpp"

namespace qtrabi::scaling {

enum class Observable { NPh, DP2 };

std::string to_string(Observable o);            // "n_ph" / "dp2"
Observable parse_observable(const std::string& text);  // accepts nph, n_ph, dp2
double value_of(const obs::ObservableSet& s, Observable o);

struct Row {
    double eta;
    double lambda;
    double value;
};

struct ScalingDataset {
    double gamma = 0.0;
    Observable observable = Observable::NPh;
    std::vector<Row> rows;
    double lambda_ref = 0.0;
};

struct ScalingFit {
    double slope;
    double intercept;
    double r_squared;
    double eta_min;
    double eta_max;
    std::size_t points;
};

struct CollapseResult {
    double nu;
    double beta_over_nu;
    double cost;
    double x_max;
    bool range_warning;  // minimizer sits on the edge of the search box
};

using PointSolver = std::function<PointResult(const PointKey&, const solver::SolverConfig&)>;

struct PointOutcome {
    PointKey key;
    std::optional<PointResult> result;
    std::string error;  // empty on success
};

/// Evaluates grid points in parallel, reading and filling the cache.
class SweepRunner {
public:
    explicit SweepRunner(solver::SolverConfig cfg, io::ResultCache* cache = nullptr, unsigned jobs = 1,
                         PointSolver solver = solve_point);

    /// One outcome per key, in input order; failures are captured.
    std::vector<PointOutcome> run_all(const std::vector<PointKey>& keys);

    /// As run_all, but throws PointError for the first failing key.
    std::vector<PointResult> run(const std::vector<PointKey>& keys);

    std::uint64_t solves() const noexcept { return solves_.load(); }
    const solver::SolverConfig& config() const noexcept { return cfg_; }
    io::ResultCache* cache() const noexcept { return cache_; }

private:
    solver::SolverConfig cfg_;
    io::ResultCache* cache_;
    unsigned jobs_;
    PointSolver solver_;
    std::atomic<std::uint64_t> solves_{0};
};

/// Cartesian (lambda outer, eta inner) sweep; one dataset per observable.
std::vector<ScalingDataset> eta_sweep(SweepRunner& runner, double gamma, const std::vector<double>& lambdas,
                                      const std::vector<double>& etas, const std::vector<Observable>& observables,
                                      double lambda_ref);

/// Sweep over explicit (eta, lambda) pairs.
std::vector<ScalingDataset> eta_sweep(SweepRunner& runner, double gamma,
                                      const std::vector<std::pair<double, double>>& eta_lambda,
                                      const std::vector<Observable>& observables, double lambda_ref);

/// OLS of ln(value) on ln(eta) over points with eta inside the window.
ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& points,
                      std::optional<std::pair<double, double>> window = std::nullopt);

/// Sweep at lambda = lambda_ref and fit; beta/nu is -slope.
ScalingFit critical_exponent_at(SweepRunner& runner, double gamma, Observable observable,
                                const std::vector<double>& etas, double lambda_ref);

/// Master-curve residual. Points are rescaled to
/// x = (lambda - lambda_ref) eta^(1/nu), y = value eta^(beta/nu); every point
/// with |x| <= x_max is compared with the linear interpolation of each other
/// eta curve that spans its x. Returns mean squared deviation / (y range)^2.
double collapse_cost(const ScalingDataset& ds, double nu, double beta_over_nu, double x_max);

/// 41 x 41 grid search then coordinate descent down to steps of 1e-3.
CollapseResult fit_collapse(const ScalingDataset& ds, std::pair<double, double> nu_range,
                            std::pair<double, double> bon_range, double x_max);

/// Couplings lambda_ref + x eta^(-1/nu_sample) for x evenly spaced over
/// [-2 x_max, 2 x_max], dropping nonpositive couplings.
std::vector<double> collapse_lambdas(double lambda_ref, double eta, double nu_sample, double x_max,
                                     int points = 61);

/// Coupling of the dp2 extremum (its minimum) on a lambda scan at fixed
/// eta, refined by a parabola through the three lowest samples.
double pseudo_critical_coupling(SweepRunner& runner, double gamma, double eta, const std::vector<double>& lambdas);

}  // namespace qtrabi::scaling
