#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sllab/assembly.hpp"
#include "sllab/matching.hpp"
#include "sllab/series_sums.hpp"
#include "sllab/stochastic_ensemble.hpp"

namespace sllab {

enum class EquationKind { discrete_sl, continuum_sl, heat, nls };

/// euler: explicit first-order step. norm_preserving: implicit midpoint
/// (Crank-Nicolson), which conserves the discrete norm for Hermitian K.
enum class Scheme { euler, norm_preserving };

struct NlsCoefficients {
    double kappa0 = 0.0;
    double kappa2 = 0.0;
};

struct EvolutionProblem {
    EquationKind kind = EquationKind::discrete_sl;
    MatchedCoefficients coefficients;
    LatticeSpec lattice;
    TimeGrid grid;
    Scheme scheme = Scheme::euler;
    PhysicalConstants constants;
    /// Required for kind == nls: H0 is re-matched from the field at the start of every step.
    std::optional<NlsCoefficients> nls;
};

struct EvolutionResult {
    Trajectory trajectory;
    std::vector<std::string> warnings;
    /// Bound on |1 + dt g| over the spectrum of -(i/hbar) K (Euler only). A
    /// warning is issued when its power over the run exceeds the growth bound
    /// of the exact flow by more than 10%.
    double multiplier_bound = 0.0;
};

EvolutionResult evolve_deterministic(const EvolutionProblem& problem, const WaveField& psi0);

/// Least-squares rate omega of psi(site, t) ~ exp(-i omega t), fitted to the
/// unwrapped phase over the trailing `fraction` of the samples.
double fit_phase_rate(const Trajectory& trajectory, Eigen::Index site, double fraction = 0.8);

struct DispersionOptions {
    Scheme scheme = Scheme::norm_preserving;
    double dt = 1e-4;
    int steps = 10000;
    int sample_stride = 10;
};

struct DispersionResult {
    double k = 0.0;
    double omega_measured = 0.0;
    double omega_analytic = 0.0;
    /// Relative error; absolute when the analytic rate is zero.
    double rel_error = 0.0;
};

/// Evolves the plane wave k = 2 pi k_index / (n1 a1) under the matched
/// discrete equation and compares its phase rate with (E0 - 2A cos(k a1))/hbar.
DispersionResult dispersion_check(double e0, double a, double a1, int n1, int k_index,
                                  const PhysicalConstants& constants, const DispersionOptions& options = {});

struct RemainderRow {
    double l_cut = 0.0;
    int n = 0;
    double formula_value = 0.0;
    double exact_value = 0.0;
    /// exact / formula
    double ratio = 0.0;
};

struct RemainderStudyResult {
    std::vector<double> l_values;
    std::vector<int> n_values;
    std::vector<RemainderRow> rows;
    /// Slope of log|formula value| against log L for each order.
    std::map<int, double> fitted_slopes;
    RemainderCoefficients coefficients;
    /// Every order's magnitude decreases strictly as L decreases.
    bool monotone_decay = false;
};

/// Tail moments H1(L) I_n(L)/n! for n = 3..n_max with H1 matched to m_eff at
/// each cutoff, tabulated over `l_values`.
RemainderStudyResult remainder_study(const std::vector<double>& l_values, int n_max, int d,
                                     const PhysicalConstants& constants);

struct ComparisonReport {
    std::vector<double> times;
    /// 99th percentile over sites of |mean - deterministic| / stderr, per sample time.
    std::vector<double> p99_gap;
    std::vector<double> max_gap;
    double max_normalized_gap = 0.0;
    bool pass = false;
};

/// Ensemble mean of the stochastic model against the Euler evolution of its
/// mean Hamiltonian. Passes when the per-time 99th percentile gap is <= 4.
ComparisonReport compare_ensemble_to_deterministic(const StochasticHamiltonianModel& model, const WaveField& psi0,
                                                   const TimeGrid& grid, int realization_count, unsigned threads = 0);

}  // namespace sllab
