#pragma once

#include <Eigen/SparseCore>

#include "sllab/lattice.hpp"
#include "sllab/matching.hpp"

namespace sllab {

using SparseMatrixC = Eigen::SparseMatrix<Complex>;

/// Split Hamiltonian evaluated on a lattice:
///   (K psi)_i = onsite_i psi_i + hop_i * sum over the 2d neighbours of psi,
/// so that dpsi/dt = -(i/hbar) K psi.
struct AssembledOperator {
    LatticeSpec lattice;
    VectorXc onsite;
    VectorXc hop;

    VectorXc apply(const VectorXc& psi) const;
    SparseMatrixC matrix() const;
    /// Real on-site terms and a real, uniform hopping make K Hermitian.
    bool hermitian(double tolerance = 1e-14) const;
};

/// Discrete kernels give hop = s2 H1/(2 a1^2) and onsite = (Delta H)_ii; they
/// need a 1D lattice with the same n1 and a1 the sums were taken over.
/// Continuum kernels give hop = H1 (L^3/3)(2L)^(d-1) / a1^2 and
/// onsite = (H0 + H1)(2L)^d - 2d hop, the lattice Laplacian being the
/// per-axis second central difference divided by a1^2.
AssembledOperator assemble(const SplitHamiltonian& split, const LatticeSpec& lattice);

/// One explicit Euler step psi <- psi - (i dt/hbar) k, where k = K psi.
inline void euler_update(VectorXc& psi, const VectorXc& k, double dt, double hbar) {
    psi += Complex(0.0, -dt / hbar) * k;
}

/// Nearest-neighbour adjacency of the periodic lattice (unit weights).
SparseMatrixC adjacency_matrix(const LatticeSpec& lattice);

}  // namespace sllab
