#include "qtrabi/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qtrabi/errors.hpp"

namespace qtrabi::obs {

using model::TruncatedHilbert;

ObservableSet measure(const solver::GroundState& gs, const TruncatedHilbert& hs, const model::ModelParams& p) {
    if (static_cast<std::size_t>(gs.vector.size()) != hs.dimension()) {
        throw ShapeError("measure: state has " + std::to_string(gs.vector.size()) + " entries, basis has " +
                         std::to_string(hs.dimension()));
    }
    const double* v = gs.vector.data();
    const auto quad = model::quadrature_operators(hs);
    const std::span<const double> state(v, hs.dimension());

    double number = 0.0;
    double h_avg = 0.0;
    std::complex<double> a_avg = 0.0;
    for (std::size_t i = 0; i < hs.dimension(); ++i) {
        const int n = TruncatedHilbert::photon(i);
        const double w = v[i] * v[i];
        number += n * w;
        h_avg += model::kAtomEnergies[TruncatedHilbert::level(i)] * w;
        if (n > 0) {
            a_avg += std::sqrt(static_cast<double>(n)) * v[i - model::kAtomDim] * v[i];
        }
    }
    const double x_frame = quad.x.expectation(state);
    const double x2 = quad.x2.expectation(state);
    const double p2 = quad.p2.expectation(state);
    // <P> = i(<a^dag> - <a>) = 2 Im<a>.
    const double p_avg = 2.0 * a_avg.imag();

    const double shift = hs.displacement;
    ObservableSet out;
    out.e_g_scaled = gs.energy / p.eta();
    out.n_ph = (number + shift * x_frame + shift * shift) / p.eta();
    out.x_avg = x_frame + 2.0 * shift;
    out.dx2 = x2 - x_frame * x_frame;
    out.dp2 = p2 - p_avg * p_avg;
    out.h_avg = h_avg;
    return out;
}

ObservableSet measure(const solver::GroundState& gs, const model::ModelParams& p) {
    return measure(gs, gs.hilbert(), p);
}

namespace {

double uniform_step(const std::vector<Sample>& table) {
    if (table.size() < 5) {
        throw InputError("derivatives need at least 5 samples, got " + std::to_string(table.size()));
    }
    const double h = (table.back().lambda - table.front().lambda) / static_cast<double>(table.size() - 1);
    if (!(h > 0.0)) {
        throw InputError("lambda grid must be ascending");
    }
    for (std::size_t i = 1; i < table.size(); ++i) {
        const double step = table[i].lambda - table[i - 1].lambda;
        if (std::fabs(step - h) > 1e-6 * h) {
            throw InputError("lambda grid is not uniform at index " + std::to_string(i));
        }
    }
    return h;
}

}  // namespace

std::vector<Sample> energy_derivatives(const std::vector<Sample>& table, int order) {
    if (order != 1 && order != 2) {
        throw InputError("derivative order must be 1 or 2");
    }
    const double h = uniform_step(table);
    const std::size_t n = table.size();
    auto f = [&](std::size_t i) { return table[i].value; };
    std::vector<Sample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].lambda = table[i].lambda;
    }
    if (order == 1) {
        out[0].value = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out[i].value = (f(i + 1) - f(i - 1)) / (2.0 * h);
        }
        out[n - 1].value = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
    } else {
        const double h2 = h * h;
        out[0].value = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            out[i].value = (f(i + 1) - 2.0 * f(i) + f(i - 1)) / h2;
        }
        out[n - 1].value = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2;
    }
    return out;
}

Jump largest_jump(const std::vector<Sample>& table) {
    if (table.size() < 3) {
        throw InputError("jump detection needs at least 3 samples");
    }
    std::vector<double> diffs(table.size() - 1);
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        diffs[i] = std::fabs(table[i + 1].value - table[i].value);
    }
    const auto max_it = std::max_element(diffs.begin(), diffs.end());
    Jump j{};
    j.index = static_cast<std::size_t>(max_it - diffs.begin());
    j.size = *max_it;
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    j.median = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    j.discontinuous = j.size > 10.0 * j.median;
    return j;
}

}  // namespace qtrabi::obs
