#pragma once

#include <vector>

#include "qtrabi/eigensolver.hpp"
#include "qtrabi/model.hpp"

namespace qtrabi::obs {

struct ObservableSet {
    double e_g_scaled;  // E_g / eta
    double n_ph;        // <a^dag a> / eta
    double dp2;         // (Delta P)^2
    double dx2;         // (Delta X)^2
    double h_avg;       // <h>
    double x_avg;       // <a + a^dag>
};

/// Quadratic forms of the ground-state vector. With a displaced basis the
/// photon operators are shifted back to the lab frame (a -> a + shift).
ObservableSet measure(const solver::GroundState& gs, const model::TruncatedHilbert& hs,
                      const model::ModelParams& p);

/// Convenience overload using gs.hilbert().
ObservableSet measure(const solver::GroundState& gs, const model::ModelParams& p);

struct Sample {
    double lambda;
    double value;
};

/// k-th derivative (k = 1 or 2) of a uniformly sampled table: second-order
/// central differences inside, second-order one-sided at the ends.
std::vector<Sample> energy_derivatives(const std::vector<Sample>& table, int order);

struct Jump {
    std::size_t index;  // jump between samples index and index + 1
    double size;        // |value[index+1] - value[index]|
    double median;      // median absolute neighbouring difference
    bool discontinuous; // size > 10 * median
};

/// Largest neighbouring difference compared to the median one.
Jump largest_jump(const std::vector<Sample>& table);

}  // namespace qtrabi::obs
