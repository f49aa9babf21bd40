#include "sllab/cli/run.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>

#include <CLI11.hpp>

#include "sllab/assembly.hpp"
#include "sllab/cli/config.hpp"
#include "sllab/cli/outputs.hpp"
#include "sllab/integrators.hpp"
#include "sllab/matching.hpp"
#include "sllab/quadrature.hpp"
#include "sllab/series_sums.hpp"
#include "sllab/stochastic_ensemble.hpp"

namespace sllab::cli {

namespace {

using nlohmann::json;

struct Outcome {
    RunResults results;
    /// Printed to stdout: a CSV table or a JSON document.
    std::string printed;
};

std::string fmt(double v) { return format_number(v); }

LatticeSpec lattice_from(const Config& cfg) {
    std::optional<double> l_cut;
    if (cfg.has_value("lattice.l_cut")) l_cut = cfg.number("lattice.l_cut");
    return make_lattice(cfg.integer("lattice.d"), cfg.integer("lattice.n1"), cfg.number("lattice.a1"), l_cut);
}

PhysicalConstants constants_from(const Config& cfg) {
    return PhysicalConstants{cfg.number("constants.hbar"), cfg.number("constants.m_eff")};
}

TimeGrid grid_from(const Config& cfg) {
    return TimeGrid{cfg.number("time.dt"), cfg.integer("time.steps"), cfg.integer("time.stride")};
}

Scheme scheme_from(const Config& cfg) {
    const std::string& s = cfg.raw("time.scheme");
    if (s == "euler") return Scheme::euler;
    if (s == "norm_preserving") return Scheme::norm_preserving;
    throw Error("cli", "time.scheme must be euler or norm_preserving, got '" + s + "'");
}

EquationKind kind_from(const Config& cfg) {
    const std::string& s = cfg.raw("evolve.kind");
    if (s == "discrete_sl") return EquationKind::discrete_sl;
    if (s == "continuum_sl") return EquationKind::continuum_sl;
    if (s == "heat") return EquationKind::heat;
    if (s == "nls") return EquationKind::nls;
    throw Error("cli", "evolve.kind must be discrete_sl, continuum_sl, heat or nls, got '" + s + "'");
}

NoiseKind noise_from(const Config& cfg) {
    const std::string& s = cfg.raw("noise.kind");
    if (s == "none") return NoiseKind::none;
    if (s == "additive_iid") return NoiseKind::additive_iid;
    if (s == "state_correlated") return NoiseKind::state_correlated;
    throw Error("cli", "noise.kind must be none, additive_iid or state_correlated, got '" + s + "'");
}

/// "<prefix>:<a>[:<b>]" split on ':'.
std::vector<std::string> split_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    return parts;
}

double spec_number(const std::string& key, const std::string& text) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error("cli", "config key " + key + ": expected a number, got '" + text + "'");
    }
    return out;
}

Eigen::VectorXd potential_from(const Config& cfg, const LatticeSpec& lattice) {
    const std::string& spec = cfg.raw("targets.v");
    const auto parts = split_spec(spec);
    if (parts.size() == 2 && parts[0] == "const") {
        return Eigen::VectorXd::Constant(1, spec_number("targets.v", parts[1]));
    }
    if (parts.size() == 2 && parts[0] == "harmonic") {
        const double k = spec_number("targets.v", parts[1]);
        Eigen::VectorXd v(lattice.site_count());
        for (Eigen::Index s = 0; s < v.size(); ++s) {
            double r2 = 0.0;
            for (int axis = 0; axis < lattice.d; ++axis) r2 += std::pow(lattice.coordinate(s, axis), 2);
            v[s] = 0.5 * k * r2;
        }
        return v;
    }
    throw Error("cli", "targets.v must be const:<value> or harmonic:<k>, got '" + spec + "'");
}

WaveField initial_state(const Config& cfg, const LatticeSpec& lattice) {
    const std::string& spec = cfg.raw("state.init");
    const auto parts = split_spec(spec);
    auto mode = [&](const std::string& text) {
        const double m = spec_number("state.init", text);
        if (m != std::round(m)) throw Error("cli", "state.init mode must be an integer");
        return static_cast<int>(m);
    };
    if (parts.size() == 2 && parts[0] == "plane") {
        std::vector<int> modes(static_cast<std::size_t>(lattice.d), 0);
        modes[0] = mode(parts[1]);
        return plane_wave_mode(lattice, modes, 1.0);
    }
    if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "gauss") {
        const double width = spec_number("state.init", parts[1]);
        std::vector<double> k(static_cast<std::size_t>(lattice.d), 0.0);
        if (parts.size() == 3) k[0] = 2.0 * std::numbers::pi * mode(parts[2]) / (lattice.n1 * lattice.a1);
        return gaussian_packet(lattice, width, k, 1.0);
    }
    throw Error("cli", "state.init must be plane:<mode> or gauss:<width>[:<mode>], got '" + spec + "'");
}

MatchedCoefficients coefficients_for(EquationKind kind, const Config& cfg, const LatticeSpec& lattice,
                                     const WaveField& psi0) {
    const PhysicalConstants constants = constants_from(cfg);
    switch (kind) {
        case EquationKind::discrete_sl:
            if (lattice.d != 1) throw Error("cli", "discrete_sl needs lattice.d = 1");
            return match_discrete(cfg.number("targets.e0"), cfg.number("targets.a"), lattice.a1, lattice.n1);
        case EquationKind::continuum_sl:
            return match_ddim(potential_from(cfg, lattice), lattice.d, lattice.l_cut, constants);
        case EquationKind::heat:
            return match_heat(cfg.number("targets.alpha"), cfg.number("targets.mu"), lattice.d, lattice.l_cut,
                              constants);
        case EquationKind::nls:
            return match_nls(cfg.number("targets.kappa0"), cfg.number("targets.kappa2"), lattice.d, lattice.l_cut,
                             psi0.values, constants);
    }
    throw Error("cli", "unhandled equation kind");
}

json complex_array(const VectorXc& v) {
    json re = json::array();
    json im = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        re.push_back(v[i].real());
        im.push_back(v[i].imag());
    }
    return json{{"re", re}, {"im", im}};
}

json coefficients_json(const MatchedCoefficients& m) {
    json out;
    out["provenance"] = m.provenance;
    out["geometry"] = m.split.geometry == KernelGeometry::discrete ? "discrete" : "continuum";
    out["h0"] = complex_array(m.split.h0);
    out["h1"] = complex_array(m.split.h1);
    out["l_cut"] = m.l_cut ? json(*m.l_cut) : json(nullptr);
    out["residuals"] = json::array();
    for (const Residual& r : m.residuals) out["residuals"].push_back({{"equation", r.equation}, {"relative", r.relative}});
    out["max_residual"] = m.max_residual();
    out["flags"] = m.flags;
    out["implied_m_eff"] = m.implied_m_eff ? json(*m.implied_m_eff) : json(nullptr);
    if (m.split.geometry == KernelGeometry::discrete) {
        out["s0"] = m.split.s0;
        out["s2"] = m.split.s2;
        out["a1"] = m.split.a1;
    } else {
        out["d"] = m.split.d;
    }
    return out;
}

std::vector<std::string> site_header(const LatticeSpec& lattice, std::vector<std::string> head,
                                     const std::vector<std::string>& tail) {
    head.push_back("site");
    for (int axis = 0; axis < lattice.d; ++axis) head.push_back("x" + std::to_string(axis + 1));
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

std::vector<std::string> site_prefix(const LatticeSpec& lattice, double time, Eigen::Index site) {
    std::vector<std::string> row{fmt(time), std::to_string(site)};
    for (int axis = 0; axis < lattice.d; ++axis) row.push_back(fmt(lattice.coordinate(site, axis)));
    return row;
}

Outcome run_sums(const Config& cfg) {
    const int first = cfg.integer("lattice.n1");
    const int last = cfg.has_value("sums.n1_max") ? cfg.integer("sums.n1_max") : first;
    CsvTable table{{"n1", "s0", "s1", "s2", "s0_brute", "s1_brute", "s2_brute", "max_abs_diff"}, {}};
    bool all_equal = true;
    const int start = cfg.has_value("sums.n1_max") ? 3 : first;
    for (int n1 = start; n1 <= last; n1 += 2) {
        const LatticeSums s = lattice_moment_sums(n1);
        const std::int64_t diff = std::max({std::llabs(s.s0 - s.s0_brute), std::llabs(s.s1 - s.s1_brute),
                                            std::llabs(s.s2 - s.s2_brute)});
        all_equal = all_equal && s.consistent();
        table.add_row({std::to_string(n1), std::to_string(s.s0), std::to_string(s.s1), std::to_string(s.s2),
                       std::to_string(s.s0_brute), std::to_string(s.s1_brute), std::to_string(s.s2_brute),
                       std::to_string(diff)});
    }
    Outcome o;
    o.results.tables["sums"] = table;
    o.results.summary = {{"rows", table.rows.size()}, {"closed_form_matches_brute_force", all_equal}};
    o.results.checks["closed_form_matches_brute_force"] = all_equal;
    o.printed = table.render();
    return o;
}

Outcome run_moments(const Config& cfg) {
    const int d = cfg.integer("lattice.d");
    const double length = cfg.number("moments.length");
    const int n_max = cfg.integer("moments.n_max");
    if (d < 1) throw Error("cli", "lattice.d must be >= 1");
    if (!(length > 0.0)) throw Error("cli", "moments.length must be positive");
    if (n_max < 0) throw Error("cli", "moments.n_max must be >= 0");

    CsvTable table{{"quantity", "d", "length", "order", "axis", "axis_prime", "closed_form", "oracle", "abs_diff"},
                   {}};
    double worst = 0.0;
    auto record = [&](const std::string& quantity, int order, int axis, int axis_prime, double closed, double oracle,
                      double scale) {
        const double diff = std::abs(closed - oracle);
        worst = std::max(worst, diff / scale);
        table.add_row({quantity, std::to_string(d), fmt(length), std::to_string(order), std::to_string(axis),
                       std::to_string(axis_prime), fmt(closed), fmt(oracle), fmt(diff)});
    };

    for (int n = 0; n <= n_max; ++n) {
        const auto est = quadrature::romberg([n](double t) { return std::pow(t, n); }, -length, length);
        record("interval_moment", n, 0, 0, interval_moment(length, n), est.value,
               2.0 * std::pow(length, n + 1) / (n + 1));
    }
    const auto volume = quadrature::box_integral([](std::span<const double>) { return 1.0; }, d, length);
    record("box_volume", 0, 0, 0, box_volume(d, length), volume.value, box_volume(d, length));
    for (int l = 1; l <= d; ++l) {
        for (int lp = 1; lp <= d; ++lp) {
            const auto est = quadrature::box_integral(
                [l, lp](std::span<const double> x) { return x[l - 1] * x[lp - 1]; }, d, length);
            record("box_second_moment", 2, l, lp, box_second_moment(d, length, l, lp), est.value,
                   box_volume(d, length) * length * length);
        }
    }
    Outcome o;
    o.results.tables["moments"] = table;
    o.results.summary = {{"rows", table.rows.size()}, {"max_scaled_diff", worst}};
    o.results.checks["oracle_agreement"] = worst <= 1e-12;
    o.printed = table.render();
    return o;
}

Outcome run_match(const Config& cfg) {
    const std::string& target = cfg.raw("match.target");
    const PhysicalConstants constants = constants_from(cfg);
    MatchedCoefficients m;
    json inputs;
    if (target == "discrete") {
        const int n1 = cfg.integer("lattice.n1");
        const double a1 = cfg.number("lattice.a1");
        m = match_discrete(cfg.number("targets.e0"), cfg.number("targets.a"), a1, n1);
        inputs = {{"e0", cfg.number("targets.e0")}, {"a", cfg.number("targets.a")}, {"a1", a1}, {"n1", n1}};
    } else if (target == "continuum_1d") {
        const std::string& mode_text = cfg.raw("match.mode");
        ContinuumMode mode;
        if (mode_text == "cutoff") {
            mode = ContinuumMode::cutoff;
        } else if (mode_text == "full_length") {
            mode = ContinuumMode::full_length;
        } else {
            throw Error("cli", "match.mode must be cutoff or full_length, got '" + mode_text + "'");
        }
        std::optional<double> length;
        if (cfg.has_value("match.length")) length = cfg.number("match.length");
        m = match_continuum_1d(cfg.number("targets.e0"), cfg.number("targets.a"), cfg.number("targets.b"), mode,
                               length, constants);
        inputs = {{"e0", cfg.number("targets.e0")}, {"a", cfg.number("targets.a")}, {"b", cfg.number("targets.b")},
                  {"mode", mode_text}};
        if (length) inputs["length"] = *length;
    } else {
        const LatticeSpec lattice = lattice_from(cfg);
        inputs = {{"d", lattice.d}, {"l_cut", lattice.l_cut}, {"hbar", constants.hbar}, {"m_eff", constants.m_eff}};
        if (target == "ddim") {
            m = match_ddim(potential_from(cfg, lattice), lattice.d, lattice.l_cut, constants);
            inputs["v"] = cfg.raw("targets.v");
        } else if (target == "heat") {
            m = match_heat(cfg.number("targets.alpha"), cfg.number("targets.mu"), lattice.d, lattice.l_cut, constants);
            inputs["alpha"] = cfg.number("targets.alpha");
            inputs["mu"] = cfg.number("targets.mu");
        } else if (target == "nls") {
            const WaveField psi = initial_state(cfg, lattice);
            m = match_nls(cfg.number("targets.kappa0"), cfg.number("targets.kappa2"), lattice.d, lattice.l_cut,
                          psi.values, constants);
            inputs["kappa0"] = cfg.number("targets.kappa0");
            inputs["kappa2"] = cfg.number("targets.kappa2");
            inputs["state"] = cfg.raw("state.init");
        } else if (target == "generic") {
            const VectorXc f0 = VectorXc::Constant(1, Complex(cfg.number("targets.f0_re"), cfg.number("targets.f0_im")));
            const VectorXc f2 = VectorXc::Constant(1, Complex(cfg.number("targets.f2_re"), cfg.number("targets.f2_im")));
            m = match_generic(f0, f2, lattice.d, lattice.l_cut, constants);
            inputs["f0"] = complex_array(f0);
            inputs["f2"] = complex_array(f2);
        } else {
            throw Error("cli", "match.target must be discrete, continuum_1d, ddim, heat, nls or generic, got '" +
                                   target + "'");
        }
    }
    Outcome o;
    o.results.summary = {{"target", target}, {"inputs", inputs}, {"coefficients", coefficients_json(m)}};
    o.results.checks["residuals_below_1e-12"] = m.max_residual() <= 1e-12;
    o.printed = o.results.summary.dump(2) + "\n";
    return o;
}

Outcome run_evolve(const Config& cfg) {
    const LatticeSpec lattice = lattice_from(cfg);
    const WaveField psi0 = initial_state(cfg, lattice);
    EvolutionProblem problem;
    problem.kind = kind_from(cfg);
    problem.coefficients = coefficients_for(problem.kind, cfg, lattice, psi0);
    problem.lattice = lattice;
    problem.grid = grid_from(cfg);
    problem.scheme = scheme_from(cfg);
    problem.constants = constants_from(cfg);
    if (problem.kind == EquationKind::nls) {
        problem.nls = NlsCoefficients{cfg.number("targets.kappa0"), cfg.number("targets.kappa2")};
    }
    const EvolutionResult result = evolve_deterministic(problem, psi0);

    CsvTable table{site_header(lattice, {"time"}, {"re", "im"}), {}};
    json times = json::array();
    json norms = json::array();
    const double n0 = psi0.squared_norm();
    double drift = 0.0;
    for (const WaveField& f : result.trajectory) {
        for (Eigen::Index s = 0; s < f.values.size(); ++s) {
            auto row = site_prefix(lattice, f.time, s);
            row.push_back(fmt(f.values[s].real()));
            row.push_back(fmt(f.values[s].imag()));
            table.add_row(std::move(row));
        }
        times.push_back(f.time);
        norms.push_back(f.squared_norm());
        drift = std::max(drift, std::abs(f.squared_norm() - n0) / n0);
    }
    Outcome o;
    o.results.tables["trajectory"] = table;
    o.results.summary = {{"kind", cfg.raw("evolve.kind")},
                         {"scheme", cfg.raw("time.scheme")},
                         {"coefficients", coefficients_json(problem.coefficients)},
                         {"times", times},
                         {"squared_norms", norms},
                         {"max_relative_norm_drift", drift},
                         {"warnings", result.warnings},
                         {"multiplier_bound", result.multiplier_bound}};
    o.printed = o.results.summary.dump(2) + "\n";
    return o;
}

Outcome run_dispersion(const Config& cfg) {
    const LatticeSpec lattice = lattice_from(cfg);
    if (lattice.d != 1) throw Error("cli", "dispersion needs lattice.d = 1");
    const DispersionOptions options{scheme_from(cfg), cfg.number("time.dt"), cfg.integer("time.steps"),
                                    cfg.integer("time.stride")};
    const double tolerance = cfg.number("dispersion.tolerance");
    CsvTable table{{"k_index", "k", "omega_measured", "omega_analytic", "rel_error", "pass"}, {}};
    bool all_pass = true;
    for (int k_index : cfg.integer_list("dispersion.k_index")) {
        const DispersionResult r = dispersion_check(cfg.number("targets.e0"), cfg.number("targets.a"), lattice.a1,
                                                    lattice.n1, k_index, constants_from(cfg), options);
        const bool pass = r.rel_error <= tolerance;
        all_pass = all_pass && pass;
        table.add_row({std::to_string(k_index), fmt(r.k), fmt(r.omega_measured), fmt(r.omega_analytic),
                       fmt(r.rel_error), pass ? "true" : "false"});
    }
    Outcome o;
    o.results.tables["dispersion"] = table;
    o.results.summary = {{"tolerance", tolerance}, {"pass", all_pass}};
    o.results.checks["phase_rate_within_tolerance"] = all_pass;
    o.printed = table.render();
    return o;
}

Outcome run_remainder(const Config& cfg) {
    const double l_min = cfg.number("remainder.l_min");
    const double l_max = cfg.number("remainder.l_max");
    const int count = cfg.integer("remainder.l_count");
    if (!(l_min > 0.0) || !(l_max > l_min) || count < 3) {
        throw Error("cli", "remainder needs 0 < l_min < l_max and l_count >= 3");
    }
    std::vector<double> l_values;
    for (int i = 0; i < count; ++i) {
        l_values.push_back(l_min * std::pow(l_max / l_min, static_cast<double>(i) / (count - 1)));
    }
    const RemainderStudyResult r =
        remainder_study(l_values, cfg.integer("remainder.n_max"), cfg.integer("lattice.d"), constants_from(cfg));

    CsvTable table{{"L_cut", "n", "paper_value", "exact_value", "ratio"}, {}};
    bool odd_zero = true;
    for (const RemainderRow& row : r.rows) {
        table.add_row({fmt(row.l_cut), std::to_string(row.n), fmt(row.formula_value), fmt(row.exact_value),
                       fmt(row.ratio)});
        if (row.n % 2 == 1 && row.exact_value != 0.0) odd_zero = false;
    }
    bool slopes_ok = true;
    json slopes = json::object();
    for (const auto& [n, slope] : r.fitted_slopes) {
        slopes[std::to_string(n)] = {{"fitted", slope}, {"expected", n - 2}};
        if (n % 2 == 0 && std::abs(slope - (n - 2)) > 1e-6) slopes_ok = false;
    }
    json c_n = json::object();
    json r_n = json::object();
    for (const auto& [n, v] : r.coefficients.c_n) c_n[std::to_string(n)] = v;
    for (const auto& [n, v] : r.coefficients.r_n) r_n[std::to_string(n)] = v;

    Outcome o;
    o.results.tables["remainder"] = table;
    o.results.summary = {{"d", cfg.integer("lattice.d")},
                         {"slopes", slopes},
                         {"monotone_decay", r.monotone_decay},
                         {"odd_order_exact_zero", odd_zero},
                         {"c", r.coefficients.c},
                         {"c_d", r.coefficients.c_d},
                         {"c_n", c_n},
                         {"r_n_at_smallest_cutoff", r_n}};
    o.results.checks["monotone_decay"] = r.monotone_decay;
    o.results.checks["even_order_slopes"] = slopes_ok;
    o.results.checks["odd_order_exact_zero"] = odd_zero;
    o.printed = table.render();
    return o;
}

StochasticHamiltonianModel model_from(const Config& cfg, const LatticeSpec& lattice, const WaveField& psi0) {
    const EquationKind kind = kind_from(cfg);
    if (kind != EquationKind::discrete_sl && kind != EquationKind::continuum_sl) {
        throw Error("cli", "stochastic runs need evolve.kind discrete_sl or continuum_sl");
    }
    StochasticHamiltonianModel model;
    model.mean_split = coefficients_for(kind, cfg, lattice, psi0).split;
    model.lattice = lattice;
    model.constants = constants_from(cfg);
    model.noise_kind = noise_from(cfg);
    model.noise_sigma = cfg.number("noise.sigma");
    model.hermitian_noise = cfg.boolean("noise.hermitian");
    model.master_seed = static_cast<std::uint64_t>(cfg.integer("ensemble.seed"));
    const std::string& kernel = cfg.raw("noise.kernel");
    if (kernel == "adjacency") {
        model.noise_kernel = adjacency_matrix(lattice);
    } else if (kernel == "onsite") {
        model.noise_kernel = SparseMatrixC(lattice.site_count(), lattice.site_count());
        model.noise_kernel.setIdentity();
    } else {
        throw Error("cli", "noise.kernel must be adjacency or onsite, got '" + kernel + "'");
    }
    return model;
}

unsigned threads_from(const Config& cfg) {
    const int t = cfg.integer("ensemble.threads");
    if (t < 0) throw Error("cli", "ensemble.threads must be >= 0");
    return static_cast<unsigned>(t);
}

Outcome run_compare(const Config& cfg) {
    const LatticeSpec lattice = lattice_from(cfg);
    const WaveField psi0 = initial_state(cfg, lattice);
    const StochasticHamiltonianModel model = model_from(cfg, lattice, psi0);
    const ComparisonReport report = compare_ensemble_to_deterministic(model, psi0, grid_from(cfg),
                                                                      cfg.integer("ensemble.r"), threads_from(cfg));
    CsvTable table{{"time", "p99_normalized_gap", "max_normalized_gap", "pass"}, {}};
    for (std::size_t i = 0; i < report.times.size(); ++i) {
        table.add_row({fmt(report.times[i]), fmt(report.p99_gap[i]), fmt(report.max_gap[i]),
                       report.p99_gap[i] <= 4.0 ? "true" : "false"});
    }
    Outcome o;
    o.results.tables["compare"] = table;
    o.results.summary = {{"noise", cfg.raw("noise.kind")},
                         {"realizations", cfg.integer("ensemble.r")},
                         {"max_normalized_gap", report.max_normalized_gap},
                         {"bound", 4.0},
                         {"pass", report.pass}};
    o.results.checks["ensemble_matches_deterministic"] = report.pass;
    o.printed = table.render();
    return o;
}

Outcome run_ensemble(const Config& cfg) {
    const LatticeSpec lattice = lattice_from(cfg);
    const WaveField psi0 = initial_state(cfg, lattice);
    const StochasticHamiltonianModel model = model_from(cfg, lattice, psi0);
    const EnsembleStats stats =
        ensemble_average(model, psi0, grid_from(cfg), cfg.integer("ensemble.r"), threads_from(cfg));
    const FactorizationReport diag = factorization_diagnostic(model, psi0, 1000);

    CsvTable table{site_header(lattice, {"time"}, {"mean_re", "mean_im", "stderr"}), {}};
    for (std::size_t t = 0; t < stats.mean_trajectory.size(); ++t) {
        const WaveField& f = stats.mean_trajectory[t];
        for (Eigen::Index s = 0; s < f.values.size(); ++s) {
            auto row = site_prefix(lattice, f.time, s);
            row.push_back(fmt(f.values[s].real()));
            row.push_back(fmt(f.values[s].imag()));
            row.push_back(fmt(stats.stderr_trajectory[t][s]));
            table.add_row(std::move(row));
        }
    }
    Outcome o;
    o.results.tables["ensemble"] = table;
    o.results.summary = {{"noise", cfg.raw("noise.kind")},
                         {"realizations", stats.realization_count},
                         {"seed", cfg.integer("ensemble.seed")},
                         {"factorization",
                          {{"samples", 1000},
                           {"gap", diag.gap},
                           {"stderr_bound", diag.stderr_bound},
                           {"within_4_sigma", diag.within()}}}};
    o.printed = o.results.summary.dump(2) + "\n";
    return o;
}

const std::map<std::string, std::pair<std::string, std::function<Outcome(const Config&)>>>& subcommands() {
    static const std::map<std::string, std::pair<std::string, std::function<Outcome(const Config&)>>> table = {
        {"sums", {"closed-form lattice sums against direct summation", run_sums}},
        {"moments", {"interval and box moments against quadrature", run_moments}},
        {"match", {"solve a coefficient-matching system", run_match}},
        {"evolve", {"deterministic time evolution", run_evolve}},
        {"dispersion", {"plane-wave phase rate against the lattice dispersion law", run_dispersion}},
        {"remainder-study", {"tail-moment power law over cutoff lengths", run_remainder}},
        {"compare", {"stochastic ensemble mean against deterministic evolution", run_compare}},
        {"ensemble", {"stochastic ensemble mean and standard error", run_ensemble}},
    };
    return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    CLI::App app{"Split-Hamiltonian lattice dynamics toolkit", "sllab"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", kToolVersion);

    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> flag_options;
    for (const auto& [name, entry] : subcommands()) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_paths[name], "flat key = value config file");
        for (const KeySpec& spec : key_table()) {
            CLI::Option* opt = sub->add_option(spec.flag, flag_values[name][spec.key], spec.help);
            flag_options[name].emplace_back(spec.key, opt);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    Config cfg;
    Outcome outcome;
    try {
        cfg.load_environment();
        if (!config_paths[name].empty()) cfg.load_file(config_paths[name]);
        for (const auto& [key, opt] : flag_options[name]) {
            if (opt->count() > 0) cfg.set(key, flag_values[name][key]);
        }
        outcome = subcommands().at(name).second(cfg);
        out << outcome.printed;

        if (cfg.has_value("output.dir")) {
            OutputRequest request;
            request.directory = cfg.raw("output.dir");
            const std::string& formats = cfg.raw("output.formats");
            request.csv = formats.find("csv") != std::string::npos;
            request.json = formats.find("json") != std::string::npos;
            if (!request.csv && !request.json) throw Error("cli", "output.formats must name csv and/or json");
            request.subcommand = name;
            request.config_echo = cfg.echo();
            request.config = cfg.to_json();
            request.tool_version = kToolVersion;
            request.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_outputs(outcome.results, request);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    for (const auto& [check, ok] : outcome.results.checks) {
        if (!ok) err << "check failed: " << check << "\n";
    }
    return outcome.results.all_checks_pass() ? 0 : 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace sllab::cli
