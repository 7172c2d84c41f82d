#include "qtrabi/eigensolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qtrabi/errors.hpp"
#include "qtrabi/meanfield.hpp"

namespace qtrabi::solver {

using model::OperatorMatrix;
using model::TruncatedHilbert;

void SolverConfig::validate() const {
    if (!(eig_tol > 0.0) || !(trunc_tol > 0.0) || !(energy_tol > 0.0)) {
        throw ParameterError("solver tolerances must be positive");
    }
    if (initial_cutoff < 1 || initial_cutoff > max_cutoff) {
        throw ParameterError("need 1 <= initial_cutoff <= max_cutoff");
    }
    if (krylov_basis < 2 || krylov_keep < 1 || krylov_keep >= krylov_basis || max_matvecs < 1) {
        throw ParameterError("invalid Krylov settings");
    }
}

namespace {

void fix_sign(Eigen::VectorXd& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (v(k) < 0.0) {
        v = -v;
    }
}

double residual_norm(const OperatorMatrix& m, const Eigen::VectorXd& x, double value) {
    return (m.apply(x) - value * x).norm();
}

Eigen::VectorXd default_start(std::size_t n) {
    std::mt19937_64 rng(0x51a7e5eedULL);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    }
    return v;
}

}  // namespace

EigenPair dense_lowest(const OperatorMatrix& m) {
    if (m.dimension() == 0) {
        throw ShapeError("cannot diagonalize an empty matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.to_dense());
    if (solver.info() != Eigen::Success) {
        throw SolverError("dense eigensolver failed", std::numeric_limits<double>::infinity());
    }
    EigenPair out{solver.eigenvalues()(0), solver.eigenvectors().col(0), 0.0, 0};
    out.vector.normalize();
    fix_sign(out.vector);
    out.residual = residual_norm(m, out.vector, out.value);
    return out;
}

EigenPair lanczos_lowest(const OperatorMatrix& m, const SolverConfig& cfg, std::span<const double> start) {
    const auto n = static_cast<Eigen::Index>(m.dimension());
    if (n == 0) {
        throw ShapeError("cannot diagonalize an empty matrix");
    }
    const Eigen::Index basis = std::min<Eigen::Index>(cfg.krylov_basis, n);
    const Eigen::Index keep = std::max<Eigen::Index>(1, std::min<Eigen::Index>(cfg.krylov_keep, basis - 1));

    Eigen::VectorXd v0;
    if (start.empty()) {
        v0 = default_start(m.dimension());
    } else {
        if (static_cast<Eigen::Index>(start.size()) != n) {
            throw ShapeError("Lanczos start vector has wrong size");
        }
        v0 = Eigen::Map<const Eigen::VectorXd>(start.data(), n);
    }
    if (!(v0.norm() > 0.0)) {
        v0 = default_start(m.dimension());
    }

    Eigen::MatrixXd v(n, basis);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(basis, basis);
    v.col(0) = v0.normalized();
    Eigen::Index size = 1;  // basis vectors held
    Eigen::Index last = 0;  // column whose image is computed next
    double best = std::numeric_limits<double>::infinity();
    int matvecs = 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
    Eigen::VectorXd w(n);
    // Ritz values are only recomputed every few steps; the projected
    // eigenproblem costs more than the sparse product at these sizes.
    constexpr int kCheckEvery = 8;
    int since_check = 0;

    auto restart_from = [&](const Eigen::VectorXd& x) {
        v.col(0) = x.normalized();
        t.setZero();
        size = 1;
        last = 0;
        since_check = 0;
    };

    while (matvecs < cfg.max_matvecs) {
        m.apply(std::span<const double>(v.col(last).data(), static_cast<std::size_t>(n)),
                std::span<double>(w.data(), static_cast<std::size_t>(n)));
        ++matvecs;

        // Classical Gram-Schmidt, applied twice.
        auto basis_view = v.leftCols(size);
        Eigen::VectorXd h = basis_view.transpose() * w;
        w.noalias() -= basis_view * h;
        const Eigen::VectorXd h2 = basis_view.transpose() * w;
        w.noalias() -= basis_view * h2;
        h += h2;
        t.col(last).head(size) = h;
        t.row(last).head(size) = h.transpose();
        const double beta = w.norm();

        const bool full = size == basis;
        const bool exhausted = size == n;
        const double bound = std::sqrt(h.squaredNorm() + beta * beta);
        const bool breakdown = beta <= 1e-14 * std::max(1.0, bound);
        if (!full && !exhausted && !breakdown && ++since_check < kCheckEvery) {
            v.col(size) = w / beta;
            last = size;
            ++size;
            continue;
        }
        since_check = 0;
        ritz.compute(t.topLeftCorner(size, size));
        const double theta = ritz.eigenvalues()(0);
        const double estimate = beta * std::fabs(ritz.eigenvectors()(size - 1, 0));

        if (estimate <= 0.5 * cfg.eig_tol || breakdown || exhausted) {
            Eigen::VectorXd x = basis_view * ritz.eigenvectors().col(0);
            x.normalize();
            const double r = residual_norm(m, x, theta);
            ++matvecs;
            best = std::min(best, r);
            if (r <= cfg.eig_tol) {
                fix_sign(x);
                return {theta, std::move(x), r, matvecs};
            }
            // Orthogonality was lost or the subspace closed early.
            restart_from(x);
            continue;
        }

        if (full) {
            // Thick restart on the lowest Ritz vectors plus the new direction.
            const Eigen::MatrixXd kept = basis_view * ritz.eigenvectors().leftCols(keep);
            v.leftCols(keep) = kept;
            t.setZero();
            t.diagonal().head(keep) = ritz.eigenvalues().head(keep);
            v.col(keep) = w / beta;
            size = keep + 1;
            last = keep;
            continue;
        }
        v.col(size) = w / beta;
        last = size;
        ++size;
    }
    throw SolverError("Lanczos did not converge within " + std::to_string(cfg.max_matvecs) +
                          " matrix-vector products (best residual " + std::to_string(best) + ")",
                      best);
}

EigenPair lowest_eigenpair(const OperatorMatrix& m, const SolverConfig& cfg, std::span<const double> start) {
    if (m.dimension() == 0) {
        throw ShapeError("cannot diagonalize an empty matrix");
    }
    if (m.dimension() < cfg.dense_threshold) {
        EigenPair out = dense_lowest(m);
        if (out.residual <= cfg.eig_tol) {
            return out;
        }
        // Rounding in the dense solve scales with the matrix norm; polish.
        return lanczos_lowest(m, cfg, std::span<const double>(out.vector.data(), m.dimension()));
    }
    return lanczos_lowest(m, cfg, start);
}

double top_level_weight(const Eigen::VectorXd& v, const TruncatedHilbert& hs) {
    if (static_cast<std::size_t>(v.size()) != hs.dimension()) {
        throw ShapeError("top_level_weight: vector size mismatch");
    }
    const int first = std::max(0, hs.fock_cutoff - 1);
    double sum = 0.0;
    for (std::size_t i = TruncatedHilbert::index(first, 0); i < hs.dimension(); ++i) {
        sum += v(static_cast<Eigen::Index>(i)) * v(static_cast<Eigen::Index>(i));
    }
    return sum;
}

namespace {

// Deepest non-trivial mean-field minimum (stable or metastable), if any.
struct MeanFieldGuess {
    double alpha = 0.0;
    double beta = 0.0;  // coherent amplitude <a>
    Eigen::Vector3d atom = Eigen::Vector3d(0.0, 0.0, 1.0);
};

std::optional<MeanFieldGuess> mean_field_guess(const model::ModelParams& p) {
    if (!(p.lambda() > 0.0)) {
        return std::nullopt;
    }
    std::vector<double> minima;
    try {
        minima = meanfield::mf_local_minima(p.lambda(), p.gamma());
    } catch (const RangeError&) {
        return std::nullopt;
    }
    if (minima.empty() || !(minima.back() > 0.0)) {
        return std::nullopt;
    }
    MeanFieldGuess g;
    g.alpha = minima.back();
    // alpha = 2 lambda beta / sqrt(eta) with omega = 1; general omega rescales eta.
    g.beta = g.alpha * std::sqrt(p.eta()) / (2.0 * p.lambda());
    g.atom = meanfield::atom_ground_energy(g.alpha, p.gamma()).vector;
    return g;
}

// |0> (x) |s=-1> (even) or |1> (x) |s=-1> (odd), plus the parity projection
// of the coherent mean-field product state when a superradiant minimum exists.
Eigen::VectorXd start_vector(const TruncatedHilbert& hs, int parity, const std::optional<MeanFieldGuess>& guess) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hs.dimension()));
    const int base_photon = (parity == -1) ? 1 : 0;
    if (base_photon <= hs.fock_cutoff) {
        v(static_cast<Eigen::Index>(TruncatedHilbert::index(base_photon, 2))) = 1.0;
    }
    if (guess) {
        Eigen::VectorXd cat = Eigen::VectorXd::Zero(v.size());
        const double b = guess->beta;
        const double log_b = std::log(b);
        for (int n = 0; n <= hs.fock_cutoff; ++n) {
            const double c = std::exp(-0.5 * b * b + n * log_b - 0.5 * std::lgamma(n + 1.0));
            for (std::size_t s = 0; s < model::kAtomDim; ++s) {
                const std::size_t i = TruncatedHilbert::index(n, s);
                if (parity == 0 || TruncatedHilbert::parity(i) == parity) {
                    cat(static_cast<Eigen::Index>(i)) = c * guess->atom(static_cast<Eigen::Index>(s));
                }
            }
        }
        const double norm = cat.norm();
        if (norm > 0.0) {
            v += cat / norm;
        }
    }
    if (!(v.norm() > 0.0)) {
        v(0) = 1.0;
    }
    return v.normalized();
}

struct SectorResult {
    EigenPair pair;
    Eigen::VectorXd full;
};

// `previous` is the same sector's eigenvector at a smaller cutoff; when
// given it is zero-padded and used as the Krylov start.
SectorResult solve_sector(const OperatorMatrix& h, const TruncatedHilbert& hs, int parity,
                          const std::optional<MeanFieldGuess>& guess, const SolverConfig& cfg,
                          const Eigen::VectorXd* previous) {
    Eigen::VectorXd start_full;
    if (previous != nullptr && previous->size() <= static_cast<Eigen::Index>(hs.dimension()) &&
        previous->norm() > 0.0) {
        start_full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hs.dimension()));
        start_full.head(previous->size()) = *previous;
    } else {
        start_full = start_vector(hs, parity, guess);
    }
    const auto indices = model::parity_sector(hs, parity);
    const OperatorMatrix sub = h.restrict_to(indices);
    Eigen::VectorXd start(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        start(static_cast<Eigen::Index>(k)) = start_full(static_cast<Eigen::Index>(indices[k]));
    }
    SectorResult out{lowest_eigenpair(sub, cfg, std::span<const double>(start.data(), indices.size())),
                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hs.dimension()))};
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.full(static_cast<Eigen::Index>(indices[k])) = out.pair.vector(static_cast<Eigen::Index>(k));
    }
    return out;
}

// Per-sector eigenvectors of the last solve, indexed by (1 - parity) / 2.
using SectorVectors = std::array<Eigen::VectorXd, 2>;

GroundState solve_at(const model::ModelParams& p, const TruncatedHilbert& hs, const SolverConfig& cfg,
                     const GroundStateOptions& opts, const std::optional<MeanFieldGuess>& guess,
                     SectorVectors* sectors = nullptr) {
    const OperatorMatrix h = model::build_hamiltonian(p, hs);
    GroundState gs{};
    gs.cutoff_used = hs.fock_cutoff;
    gs.displacement = hs.displacement;
    gs.energy_change = std::numeric_limits<double>::quiet_NaN();

    if (hs.displacement != 0.0) {
        // Parity is not a symmetry of the displaced frame.
        std::optional<MeanFieldGuess> local;
        if (guess) {
            local = *guess;
            local->beta = 0.0;
        }
        Eigen::VectorXd start = start_vector(hs, 0, std::nullopt);
        if (local) {
            for (std::size_t s = 0; s < model::kAtomDim; ++s) {
                start(static_cast<Eigen::Index>(s)) += local->atom(static_cast<Eigen::Index>(s));
            }
            start.normalize();
        }
        EigenPair pair = lowest_eigenpair(h, cfg, std::span<const double>(start.data(), hs.dimension()));
        gs.energy = pair.value;
        gs.vector = std::move(pair.vector);
        gs.residual = pair.residual;
        gs.parity = 0;
    } else {
        std::optional<SectorResult> best;
        int best_parity = 0;
        for (const int parity : {1, -1}) {
            if (opts.parity && *opts.parity != parity) {
                continue;
            }
            const std::size_t slot = parity == 1 ? 0 : 1;
            const Eigen::VectorXd* previous =
                (sectors != nullptr && (*sectors)[slot].size() > 0) ? &(*sectors)[slot] : nullptr;
            SectorResult r = solve_sector(h, hs, parity, guess, cfg, previous);
            if (sectors != nullptr) {
                (*sectors)[slot] = r.full;
            }
            if (!best || r.pair.value < best->pair.value) {
                best = std::move(r);
                best_parity = parity;
            }
        }
        gs.energy = best->pair.value;
        gs.residual = best->pair.residual;
        gs.vector = std::move(best->full);
        gs.parity = best_parity;
    }
    gs.top_level_weight = top_level_weight(gs.vector, hs);
    return gs;
}

}  // namespace

GroundState ground_state_at(const model::ModelParams& p, const TruncatedHilbert& hs, const SolverConfig& cfg,
                            const GroundStateOptions& opts) {
    cfg.validate();
    if (opts.parity && *opts.parity != 1 && *opts.parity != -1) {
        throw ParameterError("parity sector must be +1 or -1");
    }
    return solve_at(p, hs, cfg, opts, mean_field_guess(p));
}

GroundState converged_ground_state(const model::ModelParams& p, const SolverConfig& cfg,
                                   const GroundStateOptions& opts) {
    cfg.validate();
    if (opts.parity && *opts.parity != 1 && *opts.parity != -1) {
        throw ParameterError("parity sector must be +1 or -1");
    }
    const auto guess = mean_field_guess(p);

    // Start large enough to hold the mean-field photon cloud, otherwise a
    // too-small basis can agree with itself on the wrong (normal) branch.
    int cutoff = cfg.initial_cutoff;
    if (guess && opts.displacement == 0.0) {
        const double nbar = guess->beta * guess->beta;
        while (cutoff < nbar + 10.0 * std::sqrt(nbar) + 20.0 && 2 * cutoff <= cfg.max_cutoff) {
            cutoff *= 2;
        }
    }

    SectorVectors sectors;
    GroundState current = solve_at(p, TruncatedHilbert(cutoff, opts.displacement), cfg, opts, guess, &sectors);
    double last_change = std::numeric_limits<double>::quiet_NaN();
    while (true) {
        if (2 * cutoff > cfg.max_cutoff) {
            throw TruncationError("Fock cutoff would exceed max_cutoff = " + std::to_string(cfg.max_cutoff) +
                                      " (last cutoff " + std::to_string(cutoff) + ", top-level weight " +
                                      std::to_string(current.top_level_weight) + ")",
                                  cutoff, current.top_level_weight, last_change);
        }
        GroundState next =
            solve_at(p, TruncatedHilbert(2 * cutoff, opts.displacement), cfg, opts, guess, &sectors);
        if (current.top_level_weight < cfg.trunc_tol) {
            last_change = std::fabs(next.energy - current.energy) / std::max(1.0, std::fabs(current.energy));
            if (last_change < cfg.energy_tol) {
                current.energy_change = last_change;
                return current;
            }
        }
        current = std::move(next);
        cutoff *= 2;
    }
}

}  // namespace qtrabi::solver
