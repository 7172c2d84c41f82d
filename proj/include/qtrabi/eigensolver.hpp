#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "qtrabi/model.hpp"

namespace qtrabi::solver {

struct SolverConfig {
    double eig_tol = 1e-10;     // ||Hv - Ev||
    double trunc_tol = 1e-12;   // weight on the two highest Fock levels
    double energy_tol = 1e-10;  // relative energy change between cutoffs
    int initial_cutoff = 64;
    int max_cutoff = 16384;
    std::size_t dense_threshold = 400;
    // Krylov settings: basis size before a thick restart, Ritz vectors kept
    // across restarts, and the total matrix-vector product budget.
    int krylov_basis = 96;
    int krylov_keep = 24;
    int max_matvecs = 20000;

    void validate() const;
};

struct EigenPair {
    double value;
    Eigen::VectorXd vector;
    double residual;
    int matvecs;
};

/// Minimum eigenvalue and a unit eigenvector of M. Dense below
/// cfg.dense_threshold, thick-restart Lanczos with full reorthogonalization
/// above it. An empty start uses a fixed pseudo-random vector.
EigenPair lowest_eigenpair(const model::OperatorMatrix& m, const SolverConfig& cfg,
                           std::span<const double> start = {});

EigenPair dense_lowest(const model::OperatorMatrix& m);

/// Throws SolverError (carrying the best residual seen) when the
/// matrix-vector budget runs out.
EigenPair lanczos_lowest(const model::OperatorMatrix& m, const SolverConfig& cfg,
                         std::span<const double> start = {});

struct GroundState {
    double energy;
    Eigen::VectorXd vector;  // over the full basis at cutoff_used
    int cutoff_used;
    double displacement;
    double top_level_weight;
    double residual;
    int parity;            // +1 / -1, or 0 for a displaced (parity-mixed) frame
    double energy_change;  // relative change against the doubled cutoff

    model::TruncatedHilbert hilbert() const { return model::TruncatedHilbert(cutoff_used, displacement); }
};

struct GroundStateOptions {
    double displacement = 0.0;
    // Restrict the search to one parity sector. Unset: both sectors are
    // solved and the lower one is returned (even on ties).
    std::optional<int> parity;
};

/// Probability on the two highest Fock levels of a full-basis vector.
double top_level_weight(const Eigen::VectorXd& v, const model::TruncatedHilbert& hs);

/// Ground state at a fixed cutoff.
GroundState ground_state_at(const model::ModelParams& p, const model::TruncatedHilbert& hs,
                            const SolverConfig& cfg, const GroundStateOptions& opts = {});

/// Doubles the cutoff until the state has negligible top-level weight and
/// its energy is confirmed by the doubled cutoff; returns the confirmed
/// (smaller-cutoff) state. Throws TruncationError past max_cutoff.
GroundState converged_ground_state(const model::ModelParams& p, const SolverConfig& cfg,
                                   const GroundStateOptions& opts = {});

}  // namespace qtrabi::solver
