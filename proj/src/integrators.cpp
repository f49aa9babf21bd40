#include "sllab/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SparseLU>

namespace sllab {

namespace {

constexpr double kOverflow = 1e150;

AssembledOperator operator_for(const EvolutionProblem& problem, const VectorXc& psi) {
    if (problem.kind == EquationKind::nls) {
        const SplitHamiltonian& s = problem.coefficients.split;
        const MatchedCoefficients m =
            match_nls(problem.nls->kappa0, problem.nls->kappa2, s.d, s.l_cut, psi, problem.constants);
        return assemble(m.split, problem.lattice);
    }
    return assemble(problem.coefficients.split, problem.lattice);
}

/// Bound on |1 + dt g| over the eigenvalues g of -(i/hbar) K, and a bound on
/// the growth rate of the exact flow. Hermitian K has a real spectrum inside
/// [min onsite - 2d|hop|, max onsite + 2d|hop|] and a norm-preserving flow;
/// otherwise both bounds come from Gershgorin discs.
struct EulerBounds {
    double multiplier = 0.0;
    double growth_rate = 0.0;
};

EulerBounds euler_bounds(const AssembledOperator& op, double dt, double hbar) {
    const int d = op.lattice.d;
    EulerBounds out;
    if (op.hermitian()) {
        const double radius = op.onsite.cwiseAbs().maxCoeff() + 2.0 * d * op.hop.cwiseAbs().maxCoeff();
        out.multiplier = std::hypot(1.0, dt * radius / hbar);
        return out;
    }
    out.growth_rate = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < op.onsite.size(); ++i) {
        const Complex centre = Complex(0.0, -1.0 / hbar) * op.onsite[i];
        const double radius = 2.0 * d * std::abs(op.hop[i]) / hbar;
        out.multiplier = std::max(out.multiplier, std::abs(1.0 + dt * centre) + dt * radius);
        out.growth_rate = std::max(out.growth_rate, centre.real() + radius);
    }
    return out;
}

void validate(const EvolutionProblem& problem, const WaveField& psi0) {
    problem.grid.validate();
    if (psi0.values.size() != problem.lattice.site_count()) {
        throw Error("integrators", "initial field size does not match the lattice");
    }
    const bool discrete = problem.coefficients.split.geometry == KernelGeometry::discrete;
    if ((problem.kind == EquationKind::discrete_sl) != discrete) {
        throw Error("integrators", "equation kind does not match the kernel geometry");
    }
    if (problem.kind == EquationKind::nls && !problem.nls) {
        throw Error("integrators", "nonlinear problems need kappa0 and kappa2");
    }
    if (!(problem.constants.hbar > 0.0)) throw Error("integrators", "hbar must be positive");
}

/// A = I + (i dt / 2 hbar) K
SparseMatrixC implicit_matrix(const AssembledOperator& op, double dt, double hbar) {
    SparseMatrixC a = Complex(0.0, 0.5 * dt / hbar) * op.matrix();
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += 1.0;
    a.makeCompressed();
    return a;
}

double percentile99(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

EvolutionResult evolve_deterministic(const EvolutionProblem& problem, const WaveField& psi0) {
    validate(problem, psi0);
    const TimeGrid& grid = problem.grid;
    const double hbar = problem.constants.hbar;
    const std::vector<int> sampled = grid.sampled_steps();

    EvolutionResult result;
    VectorXc psi = psi0.values;
    AssembledOperator op = operator_for(problem, psi);

    if (problem.scheme == Scheme::euler) {
        const EulerBounds bounds = euler_bounds(op, grid.dt, hbar);
        result.multiplier_bound = bounds.multiplier;
        const double run_time = grid.steps * grid.dt;
        if (grid.steps * std::log(bounds.multiplier) > std::log(1.1) + run_time * std::max(bounds.growth_rate, 0.0)) {
            result.warnings.push_back("euler amplification bound " + std::to_string(bounds.multiplier) + "^" +
                                      std::to_string(grid.steps) +
                                      " exceeds the exact-flow bound by more than 10%; reduce dt or use "
                                      "norm_preserving");
        }
    }

    Eigen::SparseLU<SparseMatrixC> lu;
    if (problem.scheme == Scheme::norm_preserving) {
        const SparseMatrixC a = implicit_matrix(op, grid.dt, hbar);
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) throw Error("integrators", "implicit midpoint matrix is singular");
    }

    result.trajectory.reserve(sampled.size());
    result.trajectory.push_back(WaveField{psi0.lattice, psi, psi0.time});
    std::size_t next = 1;
    for (int n = 0; n < grid.steps; ++n) {
        if (problem.kind == EquationKind::nls && n > 0) {
            op = operator_for(problem, psi);
            if (problem.scheme == Scheme::norm_preserving) {
                lu.factorize(implicit_matrix(op, grid.dt, hbar));
                if (lu.info() != Eigen::Success) throw Error("integrators", "implicit midpoint matrix is singular");
            }
        }
        if (problem.scheme == Scheme::euler) {
            euler_update(psi, op.apply(psi), grid.dt, hbar);
        } else {
            const VectorXc rhs = psi + Complex(0.0, -0.5 * grid.dt / hbar) * op.apply(psi);
            psi = lu.solve(rhs);
        }
        if (!(psi.cwiseAbs().maxCoeff() < kOverflow)) {
            throw Error("integrators", "amplitude overflow at step " + std::to_string(n + 1));
        }
        if (next < sampled.size() && sampled[next] == n + 1) {
            result.trajectory.push_back(WaveField{psi0.lattice, psi, psi0.time + (n + 1) * grid.dt});
            ++next;
        }
    }
    return result;
}

double fit_phase_rate(const Trajectory& trajectory, Eigen::Index site, double fraction) {
    if (trajectory.size() < 3) throw Error("integrators", "phase fit needs at least 3 samples");
    std::vector<double> times;
    std::vector<double> phases;
    double unwrapped = std::arg(trajectory.front().values[site]);
    double previous = unwrapped;
    const auto first = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(trajectory.size() - 1)));
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        const double raw = std::arg(trajectory[i].values[site]);
        if (i > 0) {
            double delta = raw - previous;
            delta -= 2.0 * std::numbers::pi * std::round(delta / (2.0 * std::numbers::pi));
            unwrapped += delta;
        }
        previous = raw;
        if (i >= first) {
            times.push_back(trajectory[i].time);
            phases.push_back(unwrapped);
        }
    }
    return -slope(times, phases);
}

DispersionResult dispersion_check(double e0, double a, double a1, int n1, int k_index,
                                  const PhysicalConstants& constants, const DispersionOptions& options) {
    const LatticeSpec lattice = make_lattice(1, n1, a1);
    EvolutionProblem problem;
    problem.kind = EquationKind::discrete_sl;
    problem.coefficients = match_discrete(e0, a, a1, n1);
    problem.lattice = lattice;
    problem.grid = TimeGrid{options.dt, options.steps, options.sample_stride};
    problem.scheme = options.scheme;
    problem.constants = constants;

    const WaveField psi0 = plane_wave_mode(lattice, {k_index}, 1.0);
    const EvolutionResult evolved = evolve_deterministic(problem, psi0);

    DispersionResult out;
    out.k = 2.0 * std::numbers::pi * k_index / (n1 * a1);
    out.omega_analytic = (e0 - 2.0 * a * std::cos(out.k * a1)) / constants.hbar;
    out.omega_measured = fit_phase_rate(evolved.trajectory, lattice.n1_half);
    const double diff = std::abs(out.omega_measured - out.omega_analytic);
    out.rel_error = out.omega_analytic == 0.0 ? diff : diff / std::abs(out.omega_analytic);
    return out;
}

RemainderStudyResult remainder_study(const std::vector<double>& l_values, int n_max, int d,
                                     const PhysicalConstants& constants) {
    if (l_values.size() < 3) throw Error("integrators", "remainder study needs at least 3 cutoff lengths");
    if (n_max < 5) throw Error("integrators", "remainder study needs n_max >= 5");
    const auto [lo, hi] = std::minmax_element(l_values.begin(), l_values.end());
    if (!(*lo > 0.0)) throw Error("integrators", "cutoff lengths must be positive");
    if (*hi / *lo < 1e3 * (1.0 - 1e-12)) throw Error("integrators", "cutoff lengths must span at least 3 decades");

    RemainderStudyResult out;
    out.l_values = l_values;
    std::sort(out.l_values.begin(), out.l_values.end());
    for (int n = 3; n <= n_max; ++n) out.n_values.push_back(n);
    out.coefficients = remainder_coefficients(constants, d, out.l_values.front(), n_max);
    out.monotone_decay = true;

    const Eigen::VectorXd no_potential = Eigen::VectorXd::Zero(1);
    for (int n : out.n_values) {
        std::vector<double> log_l;
        std::vector<double> log_value;
        double previous = 0.0;
        for (std::size_t i = 0; i < out.l_values.size(); ++i) {
            const double l = out.l_values[i];
            const double h1 = match_ddim(no_potential, d, l, constants).split.h1[0].real();
            const RemainderMoment m = remainder_moment(l, n, h1, d);
            out.rows.push_back(RemainderRow{l, n, m.formula, m.exact, m.exact / m.formula});
            log_l.push_back(std::log(l));
            log_value.push_back(std::log(std::abs(m.formula)));
            // l_values ascend, so magnitudes must ascend too.
            if (i > 0 && !(std::abs(m.formula) > previous)) out.monotone_decay = false;
            previous = std::abs(m.formula);
        }
        out.fitted_slopes[n] = slope(log_l, log_value);
    }
    return out;
}

ComparisonReport compare_ensemble_to_deterministic(const StochasticHamiltonianModel& model, const WaveField& psi0,
                                                   const TimeGrid& grid, int realization_count, unsigned threads) {
    EvolutionProblem problem;
    problem.kind = model.mean_split.geometry == KernelGeometry::discrete ? EquationKind::discrete_sl
                                                                         : EquationKind::continuum_sl;
    problem.coefficients.split = model.mean_split;
    problem.lattice = model.lattice;
    problem.grid = grid;
    problem.scheme = Scheme::euler;
    problem.constants = model.constants;
    const EvolutionResult reference = evolve_deterministic(problem, psi0);
    const EnsembleStats stats = ensemble_average(model, psi0, grid, realization_count, threads);

    ComparisonReport report;
    report.pass = true;
    for (std::size_t s = 0; s < stats.mean_trajectory.size(); ++s) {
        const VectorXc& mean = stats.mean_trajectory[s].values;
        const VectorXc& det = reference.trajectory[s].values;
        const Eigen::VectorXd& se = stats.stderr_trajectory[s];
        std::vector<double> gaps(static_cast<std::size_t>(mean.size()));
        for (Eigen::Index i = 0; i < mean.size(); ++i) {
            const double diff = std::abs(mean[i] - det[i]);
            if (se[i] > 0.0) {
                gaps[i] = diff / se[i];
            } else {
                // Zero spread: only rounding-level differences are acceptable.
                gaps[i] = diff <= 1e-12 * std::max(1.0, std::abs(det[i])) ? 0.0 : std::numeric_limits<double>::infinity();
            }
        }
        report.times.push_back(stats.mean_trajectory[s].time);
        report.p99_gap.push_back(percentile99(gaps));
        report.max_gap.push_back(*std::max_element(gaps.begin(), gaps.end()));
        report.max_normalized_gap = std::max(report.max_normalized_gap, report.max_gap.back());
        if (!(report.p99_gap.back() <= 4.0)) report.pass = false;
    }
    return report;
}

}  // namespace sllab
