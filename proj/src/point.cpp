#include "qtrabi/point.hpp"

#include <cstdlib>

#include "qtrabi/io.hpp"

namespace qtrabi {

namespace {

double round15(double x) { return std::strtod(io::format_double(x, 15).c_str(), nullptr); }

}  // namespace

PointKey canonicalize(const PointKey& key) {
    return {round15(key.gamma), round15(key.lambda), round15(key.eta)};
}

PointResult solve_point(const PointKey& raw, const solver::SolverConfig& cfg) {
    const PointKey key = canonicalize(raw);
    const model::ModelParams p(key.eta, key.lambda, key.gamma);
    const solver::GroundState gs = solver::converged_ground_state(p, cfg);
    return {key, gs.energy, gs.cutoff_used, gs.top_level_weight, gs.residual, gs.parity, obs::measure(gs, p)};
}

}  // namespace qtrabi
