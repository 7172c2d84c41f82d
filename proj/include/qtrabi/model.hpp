#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qtrabi::model {

/// Physical parameters in natural units (omega = 1 unless stated otherwise).
///
/// eta is the frequency ratio Omega/omega, lambda the scaled coupling
/// g/sqrt(Omega*omega) and gamma the ratio of the two dipole transitions.
class ModelParams {
public:
    ModelParams(double eta, double lambda, double gamma, double omega = 1.0);

    double omega() const noexcept { return omega_; }
    double eta() const noexcept { return eta_; }
    double lambda() const noexcept { return lambda_; }
    double gamma() const noexcept { return gamma_; }

    /// Omega = eta * omega.
    double atom_splitting() const noexcept { return eta_ * omega_; }
    /// g = lambda * sqrt(Omega * omega).
    double coupling() const noexcept;

private:
    double omega_;
    double eta_;
    double lambda_;
    double gamma_;
};

/// Number of atomic levels.
inline constexpr std::size_t kAtomDim = 3;

/// Diagonal of h in (s = +1, 0, -1) order.
inline constexpr std::array<double, kAtomDim> kAtomEnergies{1.0, 0.0, -1.0};

/// Atomic part of the parity operator, diag(1, -1, 1).
inline constexpr std::array<int, kAtomDim> kAtomParity{1, -1, 1};

/// Truncated product basis |n> (x) |s>, n = 0..fock_cutoff outer, s inner.
///
/// A nonzero displacement means every operator is assembled with a
/// replaced by a + displacement, i.e. the Fock states are displaced states.
struct TruncatedHilbert {
    explicit TruncatedHilbert(int fock_cutoff, double displacement = 0.0);

    int fock_cutoff;
    double displacement;

    std::size_t dimension() const noexcept { return kAtomDim * (static_cast<std::size_t>(fock_cutoff) + 1); }
    static std::size_t index(int n, std::size_t level) noexcept {
        return kAtomDim * static_cast<std::size_t>(n) + level;
    }
    static int photon(std::size_t i) noexcept { return static_cast<int>(i / kAtomDim); }
    static std::size_t level(std::size_t i) noexcept { return i % kAtomDim; }
    /// Eigenvalue (+1 or -1) of exp(i pi a^dag a) (x) diag(1, -1, 1) on basis state i.
    static int parity(std::size_t i) noexcept;
};

/// Sparse real symmetric matrix. Only the lower triangle (row >= col) is
/// stored and exact zeros are dropped.
class OperatorMatrix {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    OperatorMatrix() = default;
    explicit OperatorMatrix(std::size_t dimension);

    std::size_t dimension() const noexcept { return dimension_; }
    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t nonzeros() const noexcept { return entries_.size(); }

    /// Adds value at (row, col) and, implicitly, at (col, row). Each
    /// unordered pair may be set at most once.
    void set(std::size_t row, std::size_t col, double value);

    /// y = M x.
    void apply(std::span<const double> x, std::span<double> y) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    /// <v|M|v> for a real vector.
    double expectation(std::span<const double> v) const;

    /// Element lookup (linear scan; intended for tests and small matrices).
    double at(std::size_t row, std::size_t col) const;

    Eigen::MatrixXd to_dense() const;

    /// Principal submatrix on the given (ascending) index set.
    OperatorMatrix restrict_to(std::span<const std::size_t> indices) const;

private:
    std::size_t dimension_ = 0;
    std::vector<Entry> entries_;
};

struct AtomOperators {
    Eigen::Matrix3d d;
    Eigen::Matrix3d h;
};

/// Dipole d = [[0,1,0],[1,0,gamma],[0,gamma,0]] and h = diag(1, 0, -1).
AtomOperators build_atom_operators(double gamma);

/// H = omega a^dag a + g (a^dag + a) d + Omega h in the truncated basis.
OperatorMatrix build_hamiltonian(const ModelParams& p, const TruncatedHilbert& hs);

/// Same assembly with raw (omega, g, Omega, gamma); g may be negative.
OperatorMatrix assemble_hamiltonian(double omega, double coupling, double splitting, double gamma,
                                    const TruncatedHilbert& hs);

/// X = a + a^dag, X^2 and P^2 = 2 a^dag a + 1 - a^dag^2 - a^2.
///
/// X^2 and P^2 use the untruncated matrix elements, so they differ from the
/// square of the truncated X only on the two highest Fock rows.
struct Quadratures {
    OperatorMatrix x;
    OperatorMatrix x2;
    OperatorMatrix p2;
    int truncation_affected_rows = 2;
};

Quadratures quadrature_operators(const TruncatedHilbert& hs);

/// Basis indices with the given parity (+1 or -1), ascending.
std::vector<std::size_t> parity_sector(const TruncatedHilbert& hs, int parity);

}  // namespace qtrabi::model
