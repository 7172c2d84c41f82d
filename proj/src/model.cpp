#include "qtrabi/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qtrabi/errors.hpp"

namespace qtrabi::model {

ModelParams::ModelParams(double eta, double lambda, double gamma, double omega)
    : omega_(omega), eta_(eta), lambda_(lambda), gamma_(gamma) {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw ParameterError("omega must be positive and finite, got " + std::to_string(omega));
    }
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw ParameterError("eta must be positive and finite, got " + std::to_string(eta));
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("lambda must be non-negative and finite, got " + std::to_string(lambda));
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ParameterError("gamma must be non-negative and finite, got " + std::to_string(gamma));
    }
}

double ModelParams::coupling() const noexcept {
    return lambda_ * std::sqrt(atom_splitting() * omega_);
}

TruncatedHilbert::TruncatedHilbert(int cutoff, double shift)
    : fock_cutoff(cutoff), displacement(shift) {
    if (cutoff < 1) {
        throw ParameterError("fock cutoff must be >= 1, got " + std::to_string(cutoff));
    }
    if (!std::isfinite(shift)) {
        throw ParameterError("displacement must be finite");
    }
}

int TruncatedHilbert::parity(std::size_t i) noexcept {
    const int photon_sign = (photon(i) % 2 == 0) ? 1 : -1;
    return photon_sign * kAtomParity[level(i)];
}

OperatorMatrix::OperatorMatrix(std::size_t dimension) : dimension_(dimension) {}

void OperatorMatrix::set(std::size_t row, std::size_t col, double value) {
    if (row >= dimension_ || col >= dimension_) {
        throw ShapeError("operator entry (" + std::to_string(row) + ", " + std::to_string(col) +
                         ") outside dimension " + std::to_string(dimension_));
    }
    if (value == 0.0) {
        return;
    }
    if (row < col) {
        std::swap(row, col);
    }
    entries_.push_back({row, col, value});
}

void OperatorMatrix::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dimension_ || y.size() != dimension_) {
        throw ShapeError("operator apply: vector size mismatch");
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (const auto& e : entries_) {
        y[e.row] += e.value * x[e.col];
        if (e.row != e.col) {
            y[e.col] += e.value * x[e.row];
        }
    }
}

Eigen::VectorXd OperatorMatrix::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
    return y;
}

double OperatorMatrix::expectation(std::span<const double> v) const {
    if (v.size() != dimension_) {
        throw ShapeError("operator expectation: vector size mismatch");
    }
    double sum = 0.0;
    for (const auto& e : entries_) {
        const double term = e.value * v[e.row] * v[e.col];
        sum += (e.row == e.col) ? term : 2.0 * term;
    }
    return sum;
}

double OperatorMatrix::at(std::size_t row, std::size_t col) const {
    if (row < col) {
        std::swap(row, col);
    }
    for (const auto& e : entries_) {
        if (e.row == row && e.col == col) {
            return e.value;
        }
    }
    return 0.0;
}

Eigen::MatrixXd OperatorMatrix::to_dense() const {
    const auto n = static_cast<Eigen::Index>(dimension_);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : entries_) {
        const auto r = static_cast<Eigen::Index>(e.row);
        const auto c = static_cast<Eigen::Index>(e.col);
        m(r, c) = e.value;
        m(c, r) = e.value;
    }
    return m;
}

OperatorMatrix OperatorMatrix::restrict_to(std::span<const std::size_t> indices) const {
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> position(dimension_, kAbsent);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= dimension_) {
            throw ShapeError("restrict_to: index out of range");
        }
        position[indices[k]] = k;
    }
    OperatorMatrix sub(indices.size());
    for (const auto& e : entries_) {
        const std::size_t r = position[e.row];
        const std::size_t c = position[e.col];
        if (r != kAbsent && c != kAbsent) {
            sub.set(r, c, e.value);
        }
    }
    return sub;
}

AtomOperators build_atom_operators(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ParameterError("gamma must be non-negative and finite, got " + std::to_string(gamma));
    }
    AtomOperators ops;
    ops.d << 0.0, 1.0, 0.0,
             1.0, 0.0, gamma,
             0.0, gamma, 0.0;
    ops.h = Eigen::Vector3d(kAtomEnergies[0], kAtomEnergies[1], kAtomEnergies[2]).asDiagonal();
    return ops;
}

OperatorMatrix assemble_hamiltonian(double omega, double coupling, double splitting, double gamma,
                                    const TruncatedHilbert& hs) {
    const AtomOperators atom = build_atom_operators(gamma);
    const double shift = hs.displacement;
    const int nc = hs.fock_cutoff;
    OperatorMatrix h(hs.dimension());

    for (int n = 0; n <= nc; ++n) {
        // Same photon number: omega (n + shift^2) + Omega h + 2 g shift d.
        for (std::size_t s = 0; s < kAtomDim; ++s) {
            const std::size_t i = TruncatedHilbert::index(n, s);
            h.set(i, i, omega * (n + shift * shift) + splitting * kAtomEnergies[s]);
            if (shift != 0.0) {
                for (std::size_t t = 0; t < s; ++t) {
                    h.set(i, TruncatedHilbert::index(n, t), 2.0 * coupling * shift * atom.d(s, t));
                }
            }
        }
        if (n == nc) {
            continue;
        }
        // n -> n + 1: sqrt(n+1) (g d + omega shift 1).
        const double amp = std::sqrt(static_cast<double>(n + 1));
        for (std::size_t s = 0; s < kAtomDim; ++s) {
            const std::size_t row = TruncatedHilbert::index(n + 1, s);
            for (std::size_t t = 0; t < kAtomDim; ++t) {
                double v = coupling * amp * atom.d(s, t);
                if (s == t) {
                    v += omega * shift * amp;
                }
                h.set(row, TruncatedHilbert::index(n, t), v);
            }
        }
    }
    return h;
}

OperatorMatrix build_hamiltonian(const ModelParams& p, const TruncatedHilbert& hs) {
    return assemble_hamiltonian(p.omega(), p.coupling(), p.atom_splitting(), p.gamma(), hs);
}

Quadratures quadrature_operators(const TruncatedHilbert& hs) {
    const std::size_t dim = hs.dimension();
    Quadratures q{OperatorMatrix(dim), OperatorMatrix(dim), OperatorMatrix(dim)};
    const int nc = hs.fock_cutoff;
    for (int n = 0; n <= nc; ++n) {
        for (std::size_t s = 0; s < kAtomDim; ++s) {
            const std::size_t i = TruncatedHilbert::index(n, s);
            q.x2.set(i, i, 2.0 * n + 1.0);
            q.p2.set(i, i, 2.0 * n + 1.0);
            if (n + 1 <= nc) {
                q.x.set(TruncatedHilbert::index(n + 1, s), i, std::sqrt(static_cast<double>(n + 1)));
            }
            if (n + 2 <= nc) {
                const double two_step = std::sqrt(static_cast<double>(n + 1) * static_cast<double>(n + 2));
                q.x2.set(TruncatedHilbert::index(n + 2, s), i, two_step);
                q.p2.set(TruncatedHilbert::index(n + 2, s), i, -two_step);
            }
        }
    }
    return q;
}

std::vector<std::size_t> parity_sector(const TruncatedHilbert& hs, int parity) {
    std::vector<std::size_t> out;
    out.reserve(hs.dimension() / 2 + 1);
    for (std::size_t i = 0; i < hs.dimension(); ++i) {
        if (TruncatedHilbert::parity(i) == parity) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace qtrabi::model
