#include "qtrabi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtrabi/cache.hpp"
#include "qtrabi/errors.hpp"
#include "qtrabi/io.hpp"
#include "qtrabi/meanfield.hpp"
#include "qtrabi/observables.hpp"
#include "qtrabi/parallel.hpp"
#include "qtrabi/scaling.hpp"

namespace qtrabi::cli {

namespace fs = std::filesystem;
namespace mf = meanfield;
using nlohmann::json;

namespace {

struct Globals {
    unsigned jobs = default_jobs();
    std::string cache_dir;
    bool no_cache = false;
    std::optional<double> solver_tol;
    std::string out = ".";
};

solver::SolverConfig solver_config(const Globals& g) {
    solver::SolverConfig cfg;
    if (g.solver_tol) {
        cfg.eig_tol = *g.solver_tol;
    }
    cfg.validate();
    return cfg;
}

// Shared state of the commands that run exact diagonalization.
struct EdContext {
    solver::SolverConfig cfg;
    std::unique_ptr<io::ResultCache> cache;
    std::unique_ptr<scaling::SweepRunner> runner;

    explicit EdContext(const Globals& g) : cfg(solver_config(g)) {
        if (!g.no_cache) {
            cache = std::make_unique<io::ResultCache>(io::resolve_cache_dir(g.cache_dir));
        }
        runner = std::make_unique<scaling::SweepRunner>(cfg, cache.get(), g.jobs);
    }

    void fill(io::RunManifest& m) const {
        m.solver_config = cfg;
        if (cache) {
            m.cache_hits = cache->hits();
            m.cache_misses = cache->misses();
        }
    }
};

json vec_json(const std::vector<double>& v) { return json(v); }

void write_manifest(const fs::path& dir, io::RunManifest m) {
    io::write_json(dir / "manifest.json", m.to_json());
}

// Reference coupling for a requested critical point. Empty `at` picks the
// tricritical point when gamma is within 1e-6 of it, the second-order line
// above it and the first-order line below it.
double reference_coupling(double gamma, const std::string& at) {
    std::string where = at;
    if (where.empty()) {
        if (std::abs(gamma - mf::kInvSqrt2) < 1e-6) {
            where = "tcp";
        } else {
            where = gamma > mf::kInvSqrt2 ? "second" : "first";
        }
    }
    if (where == "tcp") {
        return mf::kInvSqrt2;
    }
    if (where == "second") {
        return mf::second_order_boundary(gamma);
    }
    if (where == "first") {
        return mf::first_order_boundary(gamma);
    }
    throw InputError("--at must be tcp, second or first");
}

json fit_json(const scaling::ScalingFit& f) {
    return {{"slope", f.slope},
            {"beta_over_nu", -f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"eta_window", {f.eta_min, f.eta_max}},
            {"points", f.points}};
}

json qtcp_json() {
    const auto t = mf::qtcp();
    const auto c = mf::landau_coefficients(t.lambda, t.gamma);
    return {{"gamma", t.gamma}, {"lambda", t.lambda}, {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}};
}

// ---- phase-diagram -------------------------------------------------------

struct PhaseDiagramArgs {
    std::string gamma_range;
    std::string lambda_range;
};

void cmd_phase_diagram(const Globals& g, const PhaseDiagramArgs& a, std::ostream& err) {
    const auto gammas = io::parse_range(a.gamma_range);
    const auto lambdas = io::parse_range(a.lambda_range);
    const fs::path dir = g.out;

    const auto rows = mf::phase_diagram(gammas, lambdas, g.jobs);
    io::CsvTable table({"gamma", "lambda", "h_avg", "alpha_star", "phase"});
    for (const auto& r : rows) {
        table.row() << r.gamma << r.lambda << r.h_avg << r.alpha_star << mf::to_string(r.phase);
    }
    table.write(dir / "phase_diagram.csv");

    io::CsvTable second({"gamma", "lambda"});
    io::CsvTable first({"gamma", "lambda"});
    for (const double gamma : gammas) {
        if (gamma >= mf::kInvSqrt2) {
            second.row() << gamma << mf::second_order_boundary(gamma);
        } else {
            try {
                first.row() << gamma << mf::first_order_boundary(gamma);
            } catch (const SearchError& e) {
                err << "warning: no first-order boundary at gamma=" << io::format_double(gamma) << ": " << e.what()
                    << '\n';
            }
        }
    }
    second.write(dir / "boundary_second.csv");
    first.write(dir / "boundary_first.csv");
    io::write_json(dir / "qtcp.json", qtcp_json());

    io::RunManifest m{"phase-diagram",
                      {{"gamma_range", a.gamma_range}, {"lambda_range", a.lambda_range}, {"jobs", g.jobs}},
                      solver_config(g)};
    write_manifest(dir, m);
}

// ---- ed-sweep ------------------------------------------------------------

struct EdSweepArgs {
    double gamma = 0.0;
    std::string lambda_range;
    std::string etas;
    std::string observables = "nph,dp2,eg,h";
    int derivatives = 0;
    bool relative = false;
};

int cmd_ed_sweep(const Globals& g, const EdSweepArgs& a, std::ostream& err) {
    if (!(a.gamma > 0.0)) {
        throw ParameterError("--gamma must be positive");
    }
    std::stringstream obs_list(a.observables);
    for (std::string item; std::getline(obs_list, item, ',');) {
        if (item != "nph" && item != "dp2" && item != "eg" && item != "h") {
            throw InputError("unknown observable '" + item + "' (expected nph, dp2, eg, h)");
        }
    }
    if (a.derivatives != 0 && a.derivatives != 1 && a.derivatives != 2) {
        throw InputError("--derivatives must be 1 or 2");
    }
    const double lref = mf::transition_coupling(a.gamma);
    auto lambdas = io::parse_range(a.lambda_range);
    if (a.relative) {
        for (double& l : lambdas) {
            l *= lref;
        }
    }
    const auto etas = io::parse_list(a.etas);
    const fs::path dir = g.out;

    EdContext ctx(g);
    std::vector<PointKey> keys;
    for (const double e : etas) {
        for (const double l : lambdas) {
            keys.push_back({a.gamma, l, e});
        }
    }
    const auto outcomes = ctx.runner->run_all(keys);

    io::CsvTable table({"gamma", "eta", "lambda", "lambda_over_lc", "e_g_scaled", "n_ph", "dp2", "h_avg", "cutoff_used"});
    std::string errors;
    for (const auto& o : outcomes) {
        if (!o.result) {
            errors += "gamma=" + io::format_double(o.key.gamma, 15) + " eta=" + io::format_double(o.key.eta, 15) +
                      " lambda=" + io::format_double(o.key.lambda, 15) + ": " + o.error + "\n";
            continue;
        }
        const auto& s = o.result->observables;
        table.row() << o.key.gamma << o.key.eta << o.key.lambda << o.key.lambda / lref << s.e_g_scaled << s.n_ph
                    << s.dp2 << s.h_avg << o.result->cutoff_used;
    }
    table.write(dir / "ed_sweep.csv");

    if (a.derivatives != 0) {
        const std::string col = a.derivatives == 1 ? "de_g_scaled_dlambda" : "d2e_g_scaled_dlambda2";
        io::CsvTable deriv({"gamma", "eta", "lambda", col});
        for (std::size_t k = 0; k < etas.size(); ++k) {
            std::vector<obs::Sample> samples;
            bool complete = true;
            for (std::size_t i = 0; i < lambdas.size(); ++i) {
                const auto& o = outcomes[k * lambdas.size() + i];
                if (!o.result) {
                    complete = false;
                    break;
                }
                samples.push_back({o.key.lambda, o.result->observables.e_g_scaled});
            }
            if (!complete) {
                continue;
            }
            for (const auto& d : obs::energy_derivatives(samples, a.derivatives)) {
                deriv.row() << a.gamma << outcomes[k * lambdas.size()].key.eta << d.lambda << d.value;
            }
        }
        deriv.write(dir / "ed_sweep_derivatives.csv");
    }

    io::RunManifest m{"ed-sweep",
                      {{"gamma", a.gamma},
                       {"lambda_range", a.lambda_range},
                       {"relative", a.relative},
                       {"lambda_ref", lref},
                       {"etas", vec_json(etas)},
                       {"observables", a.observables},
                       {"derivatives", a.derivatives},
                       {"jobs", g.jobs}},
                      {}};
    ctx.fill(m);
    write_manifest(dir, m);

    if (!errors.empty()) {
        io::write_text(dir / "errors.log", errors);
        err << "some points failed; see " << (dir / "errors.log").string() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

// ---- scaling / collapse --------------------------------------------------

struct CollapseArgs {
    double gamma = 0.0;
    std::string observable;
    std::string at;
    std::optional<double> lambda_ref;
    bool pseudo_critical = false;
    std::string collapse_etas = "1000,2000,5000";
    std::string nu_range = "0.5:2.5";
    std::string bon_range = "0.1:0.9";
    double x_max = 5.0;
    std::optional<double> nu_sample;
    int points = 61;
};

struct ScalingArgs {
    std::string etas = "500,1000,2000,5000";
    bool skip_collapse = false;
};

double resolve_reference(EdContext& ctx, const CollapseArgs& a, const std::vector<double>& etas) {
    double lref = a.lambda_ref ? *a.lambda_ref : reference_coupling(a.gamma, a.at);
    if (a.pseudo_critical) {
        const double eta = *std::max_element(etas.begin(), etas.end());
        std::vector<double> scan;
        for (const double x : io::linspace(-0.2, 0.2, 41)) {
            scan.push_back(lref * (1.0 + x));
        }
        lref = scaling::pseudo_critical_coupling(*ctx.runner, a.gamma, eta, scan);
    }
    return lref;
}

double default_nu_sample(const CollapseArgs& a) {
    if (a.nu_sample) {
        return *a.nu_sample;
    }
    return std::abs(a.gamma - mf::kInvSqrt2) < 1e-6 ? 1.0 : 1.5;
}

json collapse_stage(EdContext& ctx, const CollapseArgs& a, scaling::Observable o, double lref, const fs::path& dir) {
    const auto etas = io::parse_list(a.collapse_etas);
    const auto nu_range = io::parse_interval(a.nu_range);
    const auto bon_range = io::parse_interval(a.bon_range);
    const double nu_s = default_nu_sample(a);

    std::vector<std::pair<double, double>> pts;
    for (const double e : etas) {
        for (const double l : scaling::collapse_lambdas(lref, e, nu_s, a.x_max, a.points)) {
            pts.emplace_back(e, l);
        }
    }
    const auto ds = scaling::eta_sweep(*ctx.runner, a.gamma, pts, {o}, lref).front();
    const auto fit = scaling::fit_collapse(ds, nu_range, bon_range, a.x_max);

    io::CsvTable table({"eta", "lambda", "value", "x", "y"});
    for (const auto& r : ds.rows) {
        table.row() << r.eta << r.lambda << r.value << (r.lambda - lref) * std::pow(r.eta, 1.0 / fit.nu)
                    << r.value * std::pow(r.eta, fit.beta_over_nu);
    }
    table.write(dir / "collapse.csv");
    const json j = {{"gamma", a.gamma},
                    {"observable", scaling::to_string(o)},
                    {"lambda_ref", lref},
                    {"etas", vec_json(etas)},
                    {"nu", fit.nu},
                    {"beta_over_nu", fit.beta_over_nu},
                    {"cost", fit.cost},
                    {"x_max", fit.x_max},
                    {"nu_range", {nu_range.first, nu_range.second}},
                    {"beta_over_nu_range", {bon_range.first, bon_range.second}},
                    {"nu_sample", nu_s},
                    {"range_warning", fit.range_warning}};
    io::write_json(dir / "collapse.json", j);
    return j;
}

json collapse_params(const CollapseArgs& a, double lref, unsigned jobs) {
    return {{"gamma", a.gamma},
            {"observable", a.observable},
            {"at", a.at},
            {"lambda_ref", lref},
            {"pseudo_critical", a.pseudo_critical},
            {"collapse_etas", a.collapse_etas},
            {"nu_range", a.nu_range},
            {"beta_over_nu_range", a.bon_range},
            {"x_max", a.x_max},
            {"nu_sample", default_nu_sample(a)},
            {"points", a.points},
            {"jobs", jobs}};
}

void cmd_scaling(const Globals& g, const CollapseArgs& a, const ScalingArgs& s) {
    if (!(a.gamma > 0.0)) {
        throw ParameterError("--gamma must be positive");
    }
    const auto o = scaling::parse_observable(a.observable);
    const auto etas = io::parse_list(s.etas);
    const fs::path dir = g.out;
    EdContext ctx(g);
    const double lref = resolve_reference(ctx, a, etas);

    const auto ds = scaling::eta_sweep(*ctx.runner, a.gamma, {lref}, etas, {o}, lref).front();
    io::CsvTable sweep({"gamma", "eta", "lambda", scaling::to_string(o)});
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : ds.rows) {
        sweep.row() << a.gamma << r.eta << r.lambda << r.value;
        pts.emplace_back(r.eta, r.value);
    }
    sweep.write(dir / "scaling_sweep.csv");
    json fit = fit_json(scaling::loglog_fit(pts));
    fit["gamma"] = a.gamma;
    fit["observable"] = scaling::to_string(o);
    fit["lambda_ref"] = lref;
    io::write_json(dir / "loglog_fit.json", fit);

    if (!s.skip_collapse) {
        collapse_stage(ctx, a, o, lref, dir);
    }
    json params = collapse_params(a, lref, g.jobs);
    params["etas"] = s.etas;
    params["collapse"] = !s.skip_collapse;
    io::RunManifest m{"scaling", params, {}};
    ctx.fill(m);
    write_manifest(dir, m);
}

void cmd_collapse(const Globals& g, const CollapseArgs& a) {
    if (!(a.gamma > 0.0)) {
        throw ParameterError("--gamma must be positive");
    }
    const auto o = scaling::parse_observable(a.observable);
    const fs::path dir = g.out;
    EdContext ctx(g);
    const double lref = resolve_reference(ctx, a, io::parse_list(a.collapse_etas));
    collapse_stage(ctx, a, o, lref, dir);
    io::RunManifest m{"collapse", collapse_params(a, lref, g.jobs), {}};
    ctx.fill(m);
    write_manifest(dir, m);
}

// ---- landau --------------------------------------------------------------

struct LandauArgs {
    double gamma = 0.0;
    double lambda = 0.0;
    std::string alpha_range;
    std::string order;
};

void cmd_landau(const Globals& g, const LandauArgs& a) {
    if (!(a.gamma > 0.0) || !(a.lambda > 0.0)) {
        throw ParameterError("--gamma and --lambda must be positive");
    }
    if (!a.order.empty() && a.order != "2" && a.order != "4" && a.order != "6" && a.order != "exact") {
        throw InputError("--order must be 2, 4, 6 or exact");
    }
    const auto alphas = io::parse_range(a.alpha_range);
    const fs::path dir = g.out;
    const double field = 1.0 / (4.0 * a.lambda * a.lambda);

    io::CsvTable table({"alpha", "e_exact", "e_order2", "e_order4", "e_order6"});
    std::vector<std::vector<double>> columns(4);
    for (const double alpha : alphas) {
        const double bare = field * alpha * alpha;
        const double exact = mf::mf_energy(alpha, a.lambda, a.gamma);
        const double e2 = bare + mf::perturbation_energy(alpha, a.gamma, 2);
        const double e4 = bare + mf::perturbation_energy(alpha, a.gamma, 4);
        const double e6 = bare + mf::perturbation_energy(alpha, a.gamma, 6);
        table.row() << alpha << exact << e2 << e4 << e6;
        columns[0].push_back(exact);
        columns[1].push_back(e2);
        columns[2].push_back(e4);
        columns[3].push_back(e6);
    }
    table.write(dir / "landau.csv");

    if (!a.order.empty()) {
        const std::size_t c = a.order == "exact" ? 0 : static_cast<std::size_t>(std::stoi(a.order) / 2);
        const auto& e = columns[c];
        json minima = json::array();
        for (std::size_t i = 0; i < e.size(); ++i) {
            const bool left = i == 0 || e[i] < e[i - 1];
            const bool right = i + 1 == e.size() || e[i] <= e[i + 1];
            if (left && right && i != 0 && i + 1 != e.size()) {
                minima.push_back({{"alpha", alphas[i]}, {"energy", e[i]}});
            }
        }
        io::write_json(dir / "landau_minima.json", {{"gamma", a.gamma},
                                                    {"lambda", a.lambda},
                                                    {"order", a.order},
                                                    {"grid_minima", minima}});
    }
    io::RunManifest m{"landau",
                      {{"gamma", a.gamma}, {"lambda", a.lambda}, {"alpha_range", a.alpha_range}, {"order", a.order}},
                      solver_config(g)};
    write_manifest(dir, m);
}

// ---- boundary ------------------------------------------------------------

void cmd_boundary(const Globals& g, const std::string& gamma_range, std::ostream& err) {
    const auto gammas = io::parse_range(gamma_range);
    const fs::path dir = g.out;
    io::CsvTable table({"gamma", "lambda", "order"});
    for (const double gamma : gammas) {
        if (!(gamma > 0.0)) {
            throw ParameterError("gamma values must be positive");
        }
        try {
            table.row() << gamma << mf::transition_coupling(gamma) << mf::to_string(mf::classify_transition(gamma));
        } catch (const SearchError& e) {
            err << "warning: no boundary at gamma=" << io::format_double(gamma) << ": " << e.what() << '\n';
        }
    }
    table.write(dir / "boundary.csv");
    io::write_json(dir / "qtcp.json", qtcp_json());
    io::RunManifest m{"boundary", {{"gamma_range", gamma_range}}, solver_config(g)};
    write_manifest(dir, m);
}

void add_collapse_options(CLI::App* sub, CollapseArgs& a) {
    sub->add_option("--gamma", a.gamma, "Transition ratio gamma")->required();
    sub->add_option("--observable", a.observable, "nph or dp2")->required();
    sub->add_option("--at", a.at, "Critical point: tcp, second or first")
        ->check(CLI::IsMember({"tcp", "second", "first"}));
    sub->add_option("--lambda-ref", a.lambda_ref, "Explicit reference coupling");
    sub->add_flag("--pseudo-critical", a.pseudo_critical, "Use the dp2 extremum at the largest eta as reference");
    sub->add_option("--collapse-etas", a.collapse_etas, "Comma list of eta values for the collapse")->capture_default_str();
    sub->add_option("--nu-range", a.nu_range, "Search interval lo:hi for nu")->capture_default_str();
    sub->add_option("--bon-range", a.bon_range, "Search interval lo:hi for beta/nu")->capture_default_str();
    sub->add_option("--x-max", a.x_max, "Collapse window in rescaled units")->capture_default_str();
    sub->add_option("--nu-sample", a.nu_sample, "nu used to place the sampled couplings");
    sub->add_option("--points", a.points, "Couplings per eta curve")->capture_default_str()->check(CLI::Range(2, 100000));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact diagonalization and mean-field analysis of the three-level quantum Rabi model"};
    app.require_subcommand(1);

    Globals g;
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1u, 4096u));
    app.add_option("--cache", g.cache_dir, "Result cache directory (default $QTRABI_CACHE or ./.qtrabi-cache)");
    app.add_flag("--no-cache", g.no_cache, "Do not read or write the result cache");
    app.add_option("--solver-tol", g.solver_tol, "Eigenvector residual tolerance")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    PhaseDiagramArgs pd;
    auto* s_pd = app.add_subcommand("phase-diagram", "Mean-field phase diagram and boundaries");
    s_pd->add_option("--gamma-range", pd.gamma_range, "start:stop:count")->required();
    s_pd->add_option("--lambda-range", pd.lambda_range, "start:stop:count")->required();

    EdSweepArgs ed;
    auto* s_ed = app.add_subcommand("ed-sweep", "Exact-diagonalization coupling sweep");
    s_ed->add_option("--gamma", ed.gamma, "Transition ratio gamma")->required();
    s_ed->add_option("--lambda-range", ed.lambda_range, "start:stop:count")->required();
    s_ed->add_option("--etas", ed.etas, "Comma list of eta values")->required();
    s_ed->add_option("--observables", ed.observables, "Comma list from nph,dp2,eg,h")->capture_default_str();
    s_ed->add_option("--derivatives", ed.derivatives, "Also write the 1st or 2nd lambda-derivative of E/eta");
    s_ed->add_flag("--relative", ed.relative, "Coupling range is in units of the transition coupling");

    CollapseArgs sc;
    ScalingArgs sca;
    auto* s_sc = app.add_subcommand("scaling", "Log-log exponent fit and data collapse");
    add_collapse_options(s_sc, sc);
    s_sc->add_option("--etas", sca.etas, "Comma list of eta values for the log-log fit")->capture_default_str();
    s_sc->add_flag("--no-collapse", sca.skip_collapse, "Skip the collapse stage");

    CollapseArgs co;
    auto* s_co = app.add_subcommand("collapse", "Data-collapse fit of nu and beta/nu");
    add_collapse_options(s_co, co);

    LandauArgs la;
    auto* s_la = app.add_subcommand("landau", "Mean-field energy against its Landau expansions");
    s_la->add_option("--gamma", la.gamma, "Transition ratio gamma")->required();
    s_la->add_option("--lambda", la.lambda, "Coupling lambda")->required();
    s_la->add_option("--alpha-range", la.alpha_range, "start:stop:count")->required();
    s_la->add_option("--order", la.order, "Also list grid minima of this curve: 2, 4, 6 or exact");

    std::string bd_range;
    auto* s_bd = app.add_subcommand("boundary", "Transition coupling and order along gamma");
    s_bd->add_option("--gamma-range", bd_range, "start:stop:count")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        fs::create_directories(g.out);
        if (s_pd->parsed()) {
            cmd_phase_diagram(g, pd, err);
        } else if (s_ed->parsed()) {
            return cmd_ed_sweep(g, ed, err);
        } else if (s_sc->parsed()) {
            cmd_scaling(g, sc, sca);
        } else if (s_co->parsed()) {
            cmd_collapse(g, co);
        } else if (s_la->parsed()) {
            cmd_landau(g, la);
        } else if (s_bd->parsed()) {
            cmd_boundary(g, bd_range, err);
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace qtrabi::cli
