#include "qtrabi/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qtrabi/errors.hpp"
#include "qtrabi/io.hpp"
#include "qtrabi/parallel.hpp"

namespace qtrabi::scaling {

std::string to_string(Observable o) { return o == Observable::NPh ? "n_ph" : "dp2"; }

Observable parse_observable(const std::string& text) {
    if (text == "nph" || text == "n_ph") {
        return Observable::NPh;
    }
    if (text == "dp2") {
        return Observable::DP2;
    }
    throw InputError("unknown observable '" + text + "' (expected nph or dp2)");
}

double value_of(const obs::ObservableSet& s, Observable o) { return o == Observable::NPh ? s.n_ph : s.dp2; }

SweepRunner::SweepRunner(solver::SolverConfig cfg, io::ResultCache* cache, unsigned jobs, PointSolver solver)
    : cfg_(cfg), cache_(cache), jobs_(std::max(1u, jobs)), solver_(std::move(solver)) {
    cfg_.validate();
}

std::vector<PointOutcome> SweepRunner::run_all(const std::vector<PointKey>& keys) {
    std::vector<PointOutcome> out(keys.size());
    parallel_for(keys.size(), jobs_, [&](std::size_t i) {
        const PointKey key = canonicalize(keys[i]);
        out[i].key = key;
        try {
            if (cache_ != nullptr) {
                if (auto hit = cache_->load(key, cfg_)) {
                    out[i].result = *hit;
                    return;
                }
            }
            ++solves_;
            PointResult r = solver_(key, cfg_);
            if (cache_ != nullptr) {
                cache_->store(r, cfg_);
            }
            out[i].result = std::move(r);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

std::vector<PointResult> SweepRunner::run(const std::vector<PointKey>& keys) {
    auto outcomes = run_all(keys);
    std::vector<PointResult> results;
    results.reserve(outcomes.size());
    for (auto& o : outcomes) {
        if (!o.result) {
            throw PointError("gamma=" + io::format_double(o.key.gamma, 15) + " lambda=" +
                                 io::format_double(o.key.lambda, 15) + " eta=" + io::format_double(o.key.eta, 15) +
                                 ": " + o.error,
                             o.key.gamma, o.key.lambda, o.key.eta);
        }
        results.push_back(*o.result);
    }
    return results;
}

namespace {

std::vector<ScalingDataset> assemble(double gamma, const std::vector<PointResult>& results,
                                     const std::vector<Observable>& observables, double lambda_ref) {
    std::vector<ScalingDataset> out;
    for (const Observable o : observables) {
        ScalingDataset ds;
        ds.gamma = gamma;
        ds.observable = o;
        ds.lambda_ref = lambda_ref;
        for (const auto& r : results) {
            const double v = value_of(r.observables, o);
            if (!std::isfinite(v)) {
                throw DomainError("non-finite " + to_string(o) + " at lambda=" + io::format_double(r.key.lambda));
            }
            ds.rows.push_back({r.key.eta, r.key.lambda, v});
        }
        out.push_back(std::move(ds));
    }
    return out;
}

}  // namespace

std::vector<ScalingDataset> eta_sweep(SweepRunner& runner, double gamma, const std::vector<double>& lambdas,
                                      const std::vector<double>& etas, const std::vector<Observable>& observables,
                                      double lambda_ref) {
    if (lambdas.empty() || etas.empty()) {
        throw InputError("eta_sweep needs non-empty lambda and eta grids");
    }
    if (!std::is_sorted(etas.begin(), etas.end()) ||
        std::adjacent_find(etas.begin(), etas.end()) != etas.end()) {
        throw InputError("eta grid must be strictly increasing");
    }
    std::vector<PointKey> keys;
    for (const double l : lambdas) {
        for (const double e : etas) {
            keys.push_back({gamma, l, e});
        }
    }
    return assemble(gamma, runner.run(keys), observables, lambda_ref);
}

std::vector<ScalingDataset> eta_sweep(SweepRunner& runner, double gamma,
                                      const std::vector<std::pair<double, double>>& eta_lambda,
                                      const std::vector<Observable>& observables, double lambda_ref) {
    if (eta_lambda.empty()) {
        throw InputError("eta_sweep needs at least one point");
    }
    std::vector<PointKey> keys;
    for (const auto& [e, l] : eta_lambda) {
        keys.push_back({gamma, l, e});
    }
    return assemble(gamma, runner.run(keys), observables, lambda_ref);
}

ScalingFit loglog_fit(const std::vector<std::pair<double, double>>& points,
                      std::optional<std::pair<double, double>> window) {
    std::vector<double> xs;
    std::vector<double> ys;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [eta, value] : points) {
        if (window && (eta < window->first || eta > window->second)) {
            continue;
        }
        if (!(eta > 0.0) || !(value > 0.0)) {
            throw DomainError("log-log fit needs positive eta and values");
        }
        xs.push_back(std::log(eta));
        ys.push_back(std::log(value));
        lo = std::min(lo, eta);
        hi = std::max(hi, eta);
    }
    const std::size_t n = xs.size();
    if (n < 3) {
        throw InputError("log-log fit needs at least 3 points in the window");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) {
        throw InputError("log-log fit needs at least two distinct eta values");
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double r2 = 1.0;
    if (syy > 0.0) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ys[i] - (intercept + slope * xs[i]);
            ssr += d * d;
        }
        r2 = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
    }
    return {slope, intercept, r2, lo, hi, n};
}

ScalingFit critical_exponent_at(SweepRunner& runner, double gamma, Observable observable,
                                const std::vector<double>& etas, double lambda_ref) {
    const auto ds = eta_sweep(runner, gamma, {lambda_ref}, etas, {observable}, lambda_ref);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : ds.front().rows) {
        pts.emplace_back(r.eta, r.value);
    }
    return loglog_fit(pts);
}

namespace {

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

std::vector<Curve> rescale(const ScalingDataset& ds, double nu, double beta_over_nu) {
    std::map<double, std::vector<std::pair<double, double>>> by_eta;
    for (const auto& r : ds.rows) {
        by_eta[r.eta].emplace_back((r.lambda - ds.lambda_ref) * std::pow(r.eta, 1.0 / nu),
                                   r.value * std::pow(r.eta, beta_over_nu));
    }
    std::vector<Curve> curves;
    for (auto& [eta, pts] : by_eta) {
        std::sort(pts.begin(), pts.end());
        Curve c;
        for (const auto& [x, y] : pts) {
            c.x.push_back(x);
            c.y.push_back(y);
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

double interpolate(const Curve& c, double x) {
    const auto it = std::lower_bound(c.x.begin(), c.x.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - c.x.begin());
    if (k < c.x.size() && c.x[k] == x) {
        return c.y[k];
    }
    const double t = (x - c.x[k - 1]) / (c.x[k] - c.x[k - 1]);
    return c.y[k - 1] + t * (c.y[k] - c.y[k - 1]);
}

}  // namespace

double collapse_cost(const ScalingDataset& ds, double nu, double beta_over_nu, double x_max) {
    if (!(nu > 0.0) || !(x_max > 0.0)) {
        throw InputError("collapse needs nu > 0 and x_max > 0");
    }
    const auto curves = rescale(ds, nu, beta_over_nu);
    if (curves.size() < 2) {
        throw InputError("collapse needs at least two eta curves");
    }
    double sum = 0.0;
    std::size_t count = 0;
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        for (std::size_t p = 0; p < curves[i].x.size(); ++p) {
            const double x = curves[i].x[p];
            if (std::abs(x) > x_max) {
                continue;
            }
            const double y = curves[i].y[p];
            bool used = false;
            for (std::size_t j = 0; j < curves.size(); ++j) {
                const Curve& other = curves[j];
                if (j == i || other.x.size() < 2 || x < other.x.front() || x > other.x.back()) {
                    continue;
                }
                const double d = y - interpolate(other, x);
                sum += d * d;
                ++count;
                used = true;
            }
            if (used) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (count == 0) {
        throw OverlapError("rescaled curves do not overlap inside |x| <= " + io::format_double(x_max, 6));
    }
    const double range = ymax - ymin;
    if (range == 0.0) {
        return 0.0;
    }
    return sum / static_cast<double>(count) / (range * range);
}

CollapseResult fit_collapse(const ScalingDataset& ds, std::pair<double, double> nu_range,
                            std::pair<double, double> bon_range, double x_max) {
    if (!(nu_range.first > 0.0) || !(nu_range.second > nu_range.first) || !(bon_range.second > bon_range.first)) {
        throw InputError("collapse search ranges must be increasing with nu > 0");
    }
    constexpr int kGrid = 41;
    const double dnu = (nu_range.second - nu_range.first) / (kGrid - 1);
    const double dbon = (bon_range.second - bon_range.first) / (kGrid - 1);
    auto cost_at = [&](double nu, double bon) {
        try {
            return collapse_cost(ds, nu, bon, x_max);
        } catch (const OverlapError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double best = std::numeric_limits<double>::infinity();
    double nu = 0.0;
    double bon = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        for (int k = 0; k < kGrid; ++k) {
            const double n = nu_range.first + i * dnu;
            const double b = bon_range.first + k * dbon;
            const double c = cost_at(n, b);
            if (c < best) {
                best = c;
                nu = n;
                bon = b;
            }
        }
    }
    if (!std::isfinite(best)) {
        throw OverlapError("no (nu, beta/nu) in the search box gives overlapping curves");
    }

    double snu = dnu;
    double sbon = dbon;
    while (snu >= 1e-3 || sbon >= 1e-3) {
        bool moved = false;
        for (const double dir : {-1.0, 1.0}) {
            const double n = std::clamp(nu + dir * snu, nu_range.first, nu_range.second);
            if (const double c = cost_at(n, bon); c < best) {
                best = c;
                nu = n;
                moved = true;
            }
        }
        for (const double dir : {-1.0, 1.0}) {
            const double b = std::clamp(bon + dir * sbon, bon_range.first, bon_range.second);
            if (const double c = cost_at(nu, b); c < best) {
                best = c;
                bon = b;
                moved = true;
            }
        }
        if (!moved) {
            snu *= 0.5;
            sbon *= 0.5;
        }
    }
    const double eps = 1e-3;
    const bool edge = nu - nu_range.first < eps || nu_range.second - nu < eps || bon - bon_range.first < eps ||
                      bon_range.second - bon < eps;
    return {nu, bon, best, x_max, edge};
}

std::vector<double> collapse_lambdas(double lambda_ref, double eta, double nu_sample, double x_max, int points) {
    if (points < 2 || !(eta > 0.0) || !(nu_sample > 0.0) || !(x_max > 0.0)) {
        throw InputError("collapse sampling needs points >= 2 and positive eta, nu, x_max");
    }
    const double scale = std::pow(eta, -1.0 / nu_sample);
    std::vector<double> out;
    for (const double x : io::linspace(-2.0 * x_max, 2.0 * x_max, static_cast<std::size_t>(points))) {
        const double l = lambda_ref + x * scale;
        if (l > 0.0) {
            out.push_back(l);
        }
    }
    return out;
}

double pseudo_critical_coupling(SweepRunner& runner, double gamma, double eta, const std::vector<double>& lambdas) {
    if (lambdas.size() < 3) {
        throw InputError("pseudo-critical search needs at least 3 couplings");
    }
    const auto ds = eta_sweep(runner, gamma, lambdas, {eta}, {Observable::DP2}, 0.0).front();
    std::size_t k = 0;
    for (std::size_t i = 1; i < ds.rows.size(); ++i) {
        if (ds.rows[i].value < ds.rows[k].value) {
            k = i;
        }
    }
    if (k == 0 || k + 1 == ds.rows.size()) {
        throw SearchError("dp2 minimum lies on the edge of the coupling scan");
    }
    const double x0 = ds.rows[k - 1].lambda;
    const double x1 = ds.rows[k].lambda;
    const double x2 = ds.rows[k + 1].lambda;
    const double y0 = ds.rows[k - 1].value;
    const double y1 = ds.rows[k].value;
    const double y2 = ds.rows[k + 1].value;
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    return den == 0.0 ? x1 : x1 - 0.5 * num / den;
}

}  // namespace qtrabi::scaling
