#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sllab/lattice.hpp"

namespace sllab {

enum class KernelGeometry { discrete, continuum };

/// The (H0 on-site, H1 kernel) pair of a split Hamiltonian.
///
/// Only the pair is stored; the ratio form H1 + H0 psi(x)/psi(x') is never
/// materialised. Coefficient vectors hold either one entry (uniform over the
/// lattice) or one entry per site.
///
/// Discrete geometry carries the lattice sums s0, s2 and spacing a1 of a 1D
/// lattice; continuum geometry carries the dimension and cutoff half-length of
/// the box the kernel is integrated over.
struct SplitHamiltonian {
    KernelGeometry geometry = KernelGeometry::continuum;
    VectorXc h0;
    VectorXc h1;

    std::int64_t s0 = 0;
    std::int64_t s2 = 0;
    double a1 = 1.0;

    int d = 1;
    double l_cut = 1.0;

    /// (H0) s0 + (H1)(s0 - s2/a1^2), the discrete on-site coefficient.
    VectorXc delta_h_diag() const;
    /// (2 L)^d for continuum geometry.
    double box_volume() const;
    /// (L^3/3)(2L)^(d-1) for continuum geometry.
    double laplacian_weight() const;
};

/// One equation of a matching system checked by back-substitution.
struct Residual {
    std::string equation;
    /// max over sites of |lhs - rhs| / max(|lhs|, |rhs|, sum of |terms in lhs|);
    /// absolute below 1e-300.
    double relative = 0.0;
};

struct MatchedCoefficients {
    SplitHamiltonian split;
    std::optional<double> l_cut;
    std::vector<Residual> residuals;
    std::string provenance;
    /// Caveats worth surfacing, e.g. a non-physical implied mass.
    std::vector<std::string> flags;
    /// Effective mass implied by the kinetic equation, when it is real.
    std::optional<double> implied_m_eff;

    double max_residual() const;
};

/// Target coefficients of the reference equations. Only the fields a given
/// matcher reads need to be set.
struct MatchTargets {
    double e0 = 0.0;
    double a = 1.0;
    double b = 1.0;
    Eigen::VectorXd potential = Eigen::VectorXd::Zero(1);
    double alpha = 1.0;
    double mu = 0.0;
    double kappa0 = 0.0;
    double kappa2 = -0.5;
    VectorXc f0 = VectorXc::Zero(1);
    VectorXc f2 = VectorXc::Zero(1);
};

/// Nearest-neighbour lattice equation  i hbar dpsi_i/dt = E0 psi_i - A (psi_{i-1} + psi_{i+1}).
MatchedCoefficients match_discrete(double e0, double a, double a1, int n1);

enum class ContinuumMode { cutoff, full_length };

/// Continuum 1D kernel matched to the nearest-neighbour reference with spacing b.
///
/// In cutoff mode the kernel half-width is solved from the kinetic condition
/// (1/2) H1 I2(L) = -A b^2 together with the zeroth-moment condition
/// H1 I0(L) = -2A, which fixes L = b sqrt(3). In full-length mode the same
/// closed forms are evaluated at the caller's `length`.
MatchedCoefficients match_continuum_1d(double e0, double a, double b, ContinuumMode mode,
                                       std::optional<double> length = std::nullopt,
                                       const PhysicalConstants& constants = {});

/// d-dimensional Schrodinger-like equation with potential V(x) and mass m_eff.
/// `potential` holds one value (uniform) or one per site.
MatchedCoefficients match_ddim(const Eigen::VectorXd& potential, int d, double l_cut,
                               const PhysicalConstants& constants);

/// dpsi/dt = alpha lap psi + mu psi.
MatchedCoefficients match_heat(double alpha, double mu, int d, double l_cut, const PhysicalConstants& constants);

/// dpsi/dt = -(i/hbar)(kappa2 lap psi + kappa0 |psi|^2 psi); H0 depends on `psi_now`.
MatchedCoefficients match_nls(double kappa0, double kappa2, int d, double l_cut, const VectorXc& psi_now,
                              const PhysicalConstants& constants);

/// dpsi/dt = -(i/hbar)(F2 lap psi + F0 psi) for arbitrary complex F0, F2.
///
/// Solved pointwise as two complex equations and, independently, as four real
/// equations for (Re, Im) of (H0, H1); the agreement of the two routes is
/// reported as a residual.
MatchedCoefficients match_generic(const VectorXc& f0, const VectorXc& f2, int d, double l_cut,
                                  const PhysicalConstants& constants);

}  // namespace sllab
