#pragma once

#include <cstdint>
#include <vector>

#include "sllab/assembly.hpp"
#include "sllab/lattice.hpp"
#include "sllab/matching.hpp"

namespace sllab {

enum class NoiseKind { none, additive_iid, state_correlated };

/// Time stepping of one run. Samples are recorded at every step that is a
/// multiple of `sample_stride`, plus the final step.
struct TimeGrid {
    double dt = 1e-3;
    int steps = 1;
    int sample_stride = 1;

    std::vector<int> sampled_steps() const;
    void validate() const;
};

using Trajectory = std::vector<WaveField>;

/// Realization Hamiltonians H^(r)(t) = Hbar + sigma xi^(r)_t W' around the mean split.
///
/// additive_iid draws xi ~ N(0,1) afresh for every (realization, step), so the
/// draw is independent of the state it acts on. state_correlated draws one xi
/// per realization and scales the columns of W by |psi_j|^2 of the current
/// state, which ties the Hamiltonian to the amplitudes it has produced.
/// With `hermitian_noise` the perturbation is replaced by its Hermitian part.
struct StochasticHamiltonianModel {
    SplitHamiltonian mean_split;
    LatticeSpec lattice;
    PhysicalConstants constants;
    NoiseKind noise_kind = NoiseKind::none;
    double noise_sigma = 0.0;
    SparseMatrixC noise_kernel;
    std::uint64_t master_seed = 0;
    bool hermitian_noise = true;

    /// Assembled mean Hamiltonian Hbar on the model lattice.
    AssembledOperator mean_operator() const;
};

/// Standard normal draw for (realization, step); `stream` separates independent uses.
double noise_draw(std::uint64_t master_seed, std::uint64_t realization, std::uint64_t step, std::uint64_t stream = 0);

/// Euler update psi <- psi - (i dt/hbar) K psi with K re-sampled every step.
Trajectory evolve_realization(const StochasticHamiltonianModel& model, const WaveField& psi0, const TimeGrid& grid,
                              std::uint64_t realization_index);

struct EnsembleStats {
    Trajectory mean_trajectory;
    /// Per sample time, per site: sqrt((Var Re + Var Im) / R) with unbiased variances.
    std::vector<Eigen::VectorXd> stderr_trajectory;
    int realization_count = 0;
};

/// Pointwise mean and standard error over realizations 0..R-1. Realizations
/// run on `threads` workers (0 = hardware concurrency) but are folded in
/// ascending index order, so the result does not depend on scheduling.
EnsembleStats ensemble_average(const StochasticHamiltonianModel& model, const WaveField& psi0, const TimeGrid& grid,
                               int realization_count, unsigned threads = 0);

struct FactorizationReport {
    /// mean over samples of H^(r) psi^(r)
    VectorXc lhs;
    /// (mean H^(r)) (mean psi^(r))
    VectorXc rhs;
    /// max-norm of lhs - rhs
    double gap = 0.0;
    /// largest per-site standard error of the lhs - rhs estimator
    double stderr_bound = 0.0;

    bool within(double sigmas = 4.0) const { return gap <= sigmas * stderr_bound; }
};

/// Monte Carlo check of mean(H psi) == mean(H) mean(psi) at a single instant.
///
/// Sample r draws psi^(r) = psi_probe - i sigma eta_r W' psi_probe and the
/// Hamiltonian H^(r) of the model's noise law. For additive_iid, eta_r is an
/// independent draw; for state_correlated it is the Hamiltonian's own draw and
/// W is scaled by |psi^(r)_j|^2, so the two are dependent.
FactorizationReport factorization_diagnostic(const StochasticHamiltonianModel& model, const WaveField& psi_probe,
                                             int samples);

}  // namespace sllab
