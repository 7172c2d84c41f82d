#include "qtrabi/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qtrabi/errors.hpp"
#include "qtrabi/model.hpp"
#include "qtrabi/parallel.hpp"

namespace qtrabi::meanfield {

namespace {

Eigen::Matrix3d atom_hamiltonian(double alpha, double gamma) {
    const auto ops = model::build_atom_operators(gamma);
    return ops.h + alpha * ops.d;
}

// Smallest root of det(h + alpha d - (eps - 1)) = 0 written in eps = E + 1:
//   eps^3 - 3 eps^2 + (2 - alpha^2 (1 + gamma^2)) eps + 2 gamma^2 alpha^2.
long double polish_shift(long double eps, double alpha, double gamma) {
    const long double a2 = static_cast<long double>(alpha) * alpha;
    const long double g2 = static_cast<long double>(gamma) * gamma;
    const long double linear = 2.0L - a2 * (1.0L + g2);
    const long double constant = 2.0L * g2 * a2;
    for (int it = 0; it < 30; ++it) {
        const long double f = ((eps - 3.0L) * eps + linear) * eps + constant;
        const long double df = (3.0L * eps - 6.0L) * eps + linear;
        if (df == 0.0L) {
            break;
        }
        const long double step = f / df;
        eps -= step;
        if (std::fabs(step) <= 4.0L * std::numeric_limits<long double>::epsilon() * std::fabs(eps)) {
            break;
        }
    }
    return eps;
}

void fix_sign(Eigen::Vector3d& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (v(k) < 0.0) {
        v = -v;
    }
}

struct Grid {
    std::vector<double> alpha;
    std::vector<long double> excess;
};

Grid sample(double lam, double gamma, const MinimizeOptions& opts) {
    if (opts.grid_points < 3 || !(opts.alpha_max > 0.0)) {
        throw ParameterError("minimize options need >= 3 grid points and alpha_max > 0");
    }
    Grid g;
    const auto n = static_cast<std::size_t>(opts.grid_points);
    g.alpha.resize(n);
    g.excess.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.alpha[i] = opts.alpha_max * static_cast<double>(i) / static_cast<double>(n - 1);
        g.excess[i] = mf_excess(g.alpha[i], lam, gamma);
    }
    return g;
}

double golden_section(double lo, double hi, double lam, double gamma, double tol) {
    constexpr double kInvPhi = 0.61803398874989484820;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    long double f1 = mf_excess(x1, lam, gamma);
    long double f2 = mf_excess(x2, lam, gamma);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = mf_excess(x1, lam, gamma);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = mf_excess(x2, lam, gamma);
        }
    }
    return 0.5 * (lo + hi);
}

struct Minimum {
    double alpha;
    long double excess;
};

std::vector<Minimum> refined_minima(double lam, double gamma, const MinimizeOptions& opts) {
    if (!(lam > 0.0)) {
        throw ParameterError("mean-field minimization needs lambda > 0");
    }
    const Grid g = sample(lam, gamma, opts);
    const std::size_t n = g.alpha.size();
    if (g.excess[n - 1] < g.excess[n - 2]) {
        throw RangeError("mean-field energy still decreasing at alpha_max = " + std::to_string(opts.alpha_max) +
                         " (lambda = " + std::to_string(lam) + ", gamma = " + std::to_string(gamma) + ")");
    }
    std::vector<Minimum> out;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const bool left_ok = (i == 0) || g.excess[i] <= g.excess[i - 1];
        if (!left_ok || g.excess[i] > g.excess[i + 1]) {
            continue;
        }
        const double lo = (i == 0) ? 0.0 : g.alpha[i - 1];
        const double hi = g.alpha[i + 1];
        double a = golden_section(lo, hi, lam, gamma, opts.alpha_tol);
        long double e = mf_excess(a, lam, gamma);
        // The normal-phase point is exact: a bracket at the origin that does
        // not go strictly below it is alpha = 0.
        if (i == 0 && !(e < 0.0L)) {
            a = 0.0;
            e = 0.0L;
        }
        if (!out.empty() && std::fabs(out.back().alpha - a) < 1e-8) {
            if (e < out.back().excess) {
                out.back() = {a, e};
            }
            continue;
        }
        out.push_back({a, e});
    }
    return out;
}

}  // namespace

long double atom_ground_shift(double alpha, double gamma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
    solver.computeDirect(atom_hamiltonian(alpha, gamma), Eigen::EigenvaluesOnly);
    const long double guess = static_cast<long double>(solver.eigenvalues()(0)) + 1.0L;
    return polish_shift(guess, alpha, gamma);
}

AtomGroundState atom_ground_energy(double alpha, double gamma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(atom_hamiltonian(alpha, gamma));
    AtomGroundState out;
    out.shift = polish_shift(static_cast<long double>(solver.eigenvalues()(0)) + 1.0L, alpha, gamma);
    out.energy = static_cast<double>(out.shift - 1.0L);
    out.vector = solver.eigenvectors().col(0);
    fix_sign(out.vector);
    return out;
}

long double mf_excess(double alpha, double lam, double gamma) {
    if (!(lam > 0.0)) {
        throw ParameterError("mean-field energy needs lambda > 0");
    }
    const long double a = alpha;
    const long double l = lam;
    return a * a / (4.0L * l * l) + atom_ground_shift(alpha, gamma);
}

double mf_energy(double alpha, double lam, double gamma) {
    return static_cast<double>(mf_excess(alpha, lam, gamma) - 1.0L);
}

LandauCoefficients landau_coefficients(double lam, double gamma) {
    if (!(lam > 0.0)) {
        throw ParameterError("Landau coefficients need lambda > 0");
    }
    const double g2 = gamma * gamma;
    return {1.0 / (4.0 * lam * lam) - g2, g2 * (g2 - 0.5), -g2 * (1.0 - 7.0 * g2 + 8.0 * g2 * g2) / 4.0};
}

std::string to_string(Phase phase) {
    return phase == Phase::Normal ? "NP" : "SR";
}

std::string to_string(TransitionOrder order) {
    switch (order) {
        case TransitionOrder::First: return "first";
        case TransitionOrder::Second: return "second";
        case TransitionOrder::Tricritical: return "tricritical";
        case TransitionOrder::None: break;
    }
    return "none";
}

MeanFieldSolution minimize_mf(double lam, double gamma, const MinimizeOptions& opts) {
    const auto minima = refined_minima(lam, gamma, opts);
    const auto best = std::min_element(minima.begin(), minima.end(),
                                       [](const Minimum& a, const Minimum& b) { return a.excess < b.excess; });
    MeanFieldSolution sol;
    sol.alpha_star = best->alpha;
    sol.energy = static_cast<double>(best->excess - 1.0L);
    const auto atom = atom_ground_energy(sol.alpha_star, gamma);
    sol.atom_state = atom.vector;
    sol.h_avg = atom.vector(0) * atom.vector(0) - atom.vector(2) * atom.vector(2);
    sol.phase = sol.alpha_star > 0.0 ? Phase::Superradiant : Phase::Normal;
    sol.transition_order_context =
        sol.phase == Phase::Superradiant ? classify_transition(gamma) : TransitionOrder::None;
    return sol;
}

std::vector<double> mf_local_minima(double lam, double gamma, const MinimizeOptions& opts) {
    std::vector<double> out;
    for (const auto& m : refined_minima(lam, gamma, opts)) {
        out.push_back(m.alpha);
    }
    return out;
}

AlphaExtrema alpha_extrema(const LandauCoefficients& c) {
    AlphaExtrema out{{0.0}, false};
    double alpha2 = 0.0;
    if (c.c3 == 0.0) {
        // Quartic limit of the same stationarity condition.
        if (c.c2 == 0.0) {
            return out;
        }
        alpha2 = -c.c1 / (2.0 * c.c2);
    } else {
        const double radicand = c.c2 * c.c2 - 3.0 * c.c1 * c.c3;
        if (radicand < 0.0) {
            return out;
        }
        alpha2 = (-c.c2 + std::sqrt(radicand)) / (3.0 * c.c3);
    }
    if (!(alpha2 >= 0.0)) {
        return out;
    }
    const double a = std::sqrt(alpha2);
    out.values.push_back(-a);
    out.values.push_back(a);
    out.branch_exists = true;
    return out;
}

double second_order_boundary(double gamma) {
    if (!(gamma >= kInvSqrt2)) {
        throw DomainError("second-order boundary requires gamma >= 1/sqrt(2); use first_order_boundary for gamma = " +
                          std::to_string(gamma));
    }
    return 1.0 / (2.0 * gamma);
}

double first_order_boundary(double gamma) {
    if (!(gamma > 0.0) || gamma >= kInvSqrt2) {
        throw DomainError("first-order boundary requires 0 < gamma < 1/sqrt(2), got " + std::to_string(gamma));
    }
    auto superradiant = [gamma](double lam) { return minimize_mf(lam, gamma).phase == Phase::Superradiant; };
    constexpr double kStep = 0.02;
    constexpr double kMaxLambda = 5.0;
    double lo = 0.0;
    double hi = 0.0;
    bool found = false;
    for (int k = 1; k * kStep <= kMaxLambda + 1e-12; ++k) {
        const double lam = k * kStep;
        if (superradiant(lam)) {
            hi = lam;
            lo = (k - 1) * kStep;
            found = true;
            break;
        }
    }
    if (!found) {
        throw SearchError("no NP/SR degeneracy found for lambda in (0, 5] at gamma = " + std::to_string(gamma));
    }
    if (lo == 0.0) {
        lo = 1e-6;
    }
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (superradiant(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double landau_first_order_boundary(double gamma) {
    const auto c = landau_coefficients(1.0, gamma);
    if (!(c.c3 > 0.0)) {
        throw DomainError("Landau equal-depth condition needs c3 > 0 (gamma in (0.4240, 0.8338)), got gamma = " +
                          std::to_string(gamma));
    }
    return 1.0 / (2.0 * std::sqrt(gamma * gamma + c.c2 * c.c2 / (4.0 * c.c3)));
}

double transition_coupling(double gamma) {
    if (std::fabs(gamma - kInvSqrt2) < 1e-9) {
        return kInvSqrt2;
    }
    return gamma > kInvSqrt2 ? second_order_boundary(gamma) : first_order_boundary(gamma);
}

TricriticalPoint qtcp() {
    auto bisect = [](auto f, double lo, double hi) {
        double flo = f(lo);
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    // c2 changes sign only at gamma^2 = 1/2 on (0.5, 1).
    const double gamma = bisect([](double g) { return landau_coefficients(1.0, g).c2; }, 0.5, 1.0);
    const double lambda = bisect([gamma](double l) { return landau_coefficients(l, gamma).c1; }, 0.1, 5.0);
    if (!(landau_coefficients(lambda, gamma).c3 > 0.0)) {
        throw Error("tricritical solution has c3 <= 0");
    }
    return {gamma, lambda};
}

TransitionOrder classify_transition(double gamma) {
    if (!(gamma >= 0.0)) {
        throw ParameterError("gamma must be non-negative");
    }
    if (std::fabs(gamma - kInvSqrt2) < 1e-9) {
        return TransitionOrder::Tricritical;
    }
    return gamma > kInvSqrt2 ? TransitionOrder::Second : TransitionOrder::First;
}

double order_parameter_jump(double gamma, double step, int half_width) {
    const double centre = transition_coupling(gamma);
    double prev = minimize_mf(centre - half_width * step, gamma).alpha_star;
    double jump = 0.0;
    for (int k = -half_width + 1; k <= half_width; ++k) {
        const double a = minimize_mf(centre + k * step, gamma).alpha_star;
        jump = std::max(jump, std::fabs(a - prev));
        prev = a;
    }
    return jump;
}

long double perturbation_shift(double alpha, double gamma, int order) {
    if (order != 2 && order != 4 && order != 6) {
        throw ParameterError("perturbation order must be 2, 4 or 6, got " + std::to_string(order));
    }
    const long double a2 = static_cast<long double>(alpha) * alpha;
    const long double g2 = static_cast<long double>(gamma) * gamma;
    long double shift = -a2 * g2;
    if (order >= 4) {
        shift += g2 * (g2 - 0.5L) * a2 * a2;
    }
    if (order >= 6) {
        shift += -g2 * (1.0L - 7.0L * g2 + 8.0L * g2 * g2) / 4.0L * a2 * a2 * a2;
    }
    return shift;
}

double perturbation_energy(double alpha, double gamma, int order) {
    return static_cast<double>(perturbation_shift(alpha, gamma, order) - 1.0L);
}

std::vector<PhaseRow> phase_diagram(const std::vector<double>& gammas, const std::vector<double>& lambdas,
                                    unsigned jobs) {
    auto check = [](const std::vector<double>& grid, const char* name) {
        if (grid.empty()) {
            throw InputError(std::string(name) + " grid is empty");
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) {
                throw InputError(std::string(name) + " grid must be strictly ascending");
            }
        }
    };
    check(gammas, "gamma");
    check(lambdas, "lambda");
    std::vector<PhaseRow> rows(gammas.size() * lambdas.size());
    parallel_for(rows.size(), jobs, [&](std::size_t k) {
        const double g = gammas[k / lambdas.size()];
        const double l = lambdas[k % lambdas.size()];
        const auto sol = minimize_mf(l, g);
        rows[k] = {g, l, sol.h_avg, sol.alpha_star, sol.phase};
    });
    return rows;
}

}  // namespace qtrabi::meanfield
