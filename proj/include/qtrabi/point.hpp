#pragma once

#include "qtrabi/eigensolver.hpp"
#include "qtrabi/observables.hpp"

namespace qtrabi {

/// One (gamma, lambda, eta) grid point of an exact-diagonalization sweep.
struct PointKey {
    double gamma;
    double lambda;
    double eta;
};

/// Ground-state diagnostics and observables for one grid point; this is
/// what sweeps produce and what the result cache stores.
struct PointResult {
    PointKey key;
    double energy;
    int cutoff_used;
    double top_level_weight;
    double residual;
    int parity;
    obs::ObservableSet observables;
};

/// Rounds every coordinate to 15 significant digits.
PointKey canonicalize(const PointKey& key);

/// Converged ED plus measurement at a (canonicalized) point.
PointResult solve_point(const PointKey& key, const solver::SolverConfig& cfg);

}  // namespace qtrabi
