#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qtrabi::meanfield {

/// gamma_TCP = lambda_TCP = 1/sqrt(2).
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Lowest eigenpair of h + alpha d.
///
/// `shift` is E + 1 computed in extended precision straight from the
/// characteristic polynomial, so it keeps full relative accuracy when
/// alpha is small and E is close to -1.
struct AtomGroundState {
    double energy;
    long double shift;
    Eigen::Vector3d vector;
};

AtomGroundState atom_ground_energy(double alpha, double gamma);

/// Only the extended-precision shift E + 1 (no eigenvector).
long double atom_ground_shift(double alpha, double gamma);

/// Mean-field energy E/Omega = alpha^2/(4 lambda^2) + E_atom(alpha).
double mf_energy(double alpha, double lam, double gamma);

/// mf_energy + 1 in extended precision.
long double mf_excess(double alpha, double lam, double gamma);

struct LandauCoefficients {
    double c1;
    double c2;
    double c3;
};

LandauCoefficients landau_coefficients(double lam, double gamma);

enum class Phase { Normal, Superradiant };
enum class TransitionOrder { None, First, Second, Tricritical };

std::string to_string(Phase phase);
std::string to_string(TransitionOrder order);

struct MeanFieldSolution {
    double alpha_star;
    double energy;  // E/Omega at the global minimum
    Eigen::Vector3d atom_state;
    double h_avg;
    Phase phase;
    TransitionOrder transition_order_context;
};

struct MinimizeOptions {
    double alpha_max = 8.0;
    int grid_points = 2001;
    double alpha_tol = 1e-10;
};

/// Global minimum of mf_energy over alpha in [0, alpha_max]: every local
/// minimum of a coarse grid is refined by golden-section search and the
/// deepest one wins. Throws RangeError if the energy still decreases at
/// alpha_max.
MeanFieldSolution minimize_mf(double lam, double gamma, const MinimizeOptions& opts = {});

/// All local minima alpha >= 0 of mf_energy (refined, ascending). Includes
/// 0 when the normal-phase point is locally stable.
std::vector<double> mf_local_minima(double lam, double gamma, const MinimizeOptions& opts = {});

struct AlphaExtrema {
    std::vector<double> values;  // 0 first, then -alpha, +alpha when present
    bool branch_exists;
};

/// Stationary points of c1 a^2 + c2 a^4 + c3 a^6 from the closed-form root.
AlphaExtrema alpha_extrema(const LandauCoefficients& c);

/// lambda_c = 1/(2 gamma), valid for gamma >= gamma_TCP.
double second_order_boundary(double gamma);

/// lambda where the alpha = 0 and alpha > 0 minima are degenerate
/// (0 < gamma < gamma_TCP), located by bisection to 1e-8.
double first_order_boundary(double gamma);

/// Equal-depth condition c1 = c2^2/(4 c3) of the sextic polynomial; only
/// defined where c3 > 0.
double landau_first_order_boundary(double gamma);

/// Transition coupling for any gamma > 0: first-order line below gamma_TCP,
/// 1/(2 gamma) at and above it.
double transition_coupling(double gamma);

struct TricriticalPoint {
    double gamma;
    double lambda;
};

/// Solves c1 = c2 = 0 numerically and checks c3 > 0.
TricriticalPoint qtcp();

TransitionOrder classify_transition(double gamma);

/// Largest change of alpha* between adjacent points of a lambda scan with
/// the given step, centred on transition_coupling(gamma).
double order_parameter_jump(double gamma, double step = 1e-4, int half_width = 20);

/// Perturbative ground energy of h + alpha d to order 2, 4 or 6.
double perturbation_energy(double alpha, double gamma, int order);

/// perturbation_energy + 1 in extended precision.
long double perturbation_shift(double alpha, double gamma, int order);

struct PhaseRow {
    double gamma;
    double lambda;
    double h_avg;
    double alpha_star;
    Phase phase;
};

/// minimize_mf on every grid point; rows in row-major (gamma outer) order.
std::vector<PhaseRow> phase_diagram(const std::vector<double>& gammas, const std::vector<double>& lambdas,
                                    unsigned jobs = 1);

}  // namespace qtrabi::meanfield
