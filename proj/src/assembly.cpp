#include "sllab/assembly.hpp"

#include <cmath>
#include <vector>

namespace sllab {

namespace {

VectorXc broadcast(const VectorXc& v, Eigen::Index n) {
    if (v.size() == 1) return VectorXc::Constant(n, v[0]);
    if (v.size() != n) throw Error("matching", "coefficient field size does not match the lattice");
    return v;
}

}  // namespace

VectorXc AssembledOperator::apply(const VectorXc& psi) const {
    if (psi.size() != onsite.size()) throw Error("matching", "field size does not match the operator");
    return onsite.cwiseProduct(psi) + hop.cwiseProduct(neighbor_sum(lattice, psi));
}

SparseMatrixC AssembledOperator::matrix() const {
    const Eigen::Index n = onsite.size();
    std::vector<Eigen::Triplet<Complex>> entries;
    entries.reserve(static_cast<std::size_t>(n * (1 + 2 * lattice.d)));
    for (Eigen::Index s = 0; s < n; ++s) {
        entries.emplace_back(s, s, onsite[s]);
        for (int axis = 0; axis < lattice.d; ++axis) {
            entries.emplace_back(s, lattice.shifted(s, axis, -1), hop[s]);
            entries.emplace_back(s, lattice.shifted(s, axis, +1), hop[s]);
        }
    }
    SparseMatrixC k(n, n);
    k.setFromTriplets(entries.begin(), entries.end());
    return k;
}

bool AssembledOperator::hermitian(double tolerance) const {
    const double scale = std::max(1.0, std::max(onsite.cwiseAbs().maxCoeff(), hop.cwiseAbs().maxCoeff()));
    if (onsite.imag().cwiseAbs().maxCoeff() > tolerance * scale) return false;
    if (hop.imag().cwiseAbs().maxCoeff() > tolerance * scale) return false;
    return (hop.real().array() - hop[0].real()).abs().maxCoeff() <= tolerance * scale;
}

AssembledOperator assemble(const SplitHamiltonian& split, const LatticeSpec& lattice) {
    const Eigen::Index n = lattice.site_count();
    AssembledOperator op;
    op.lattice = lattice;
    if (split.geometry == KernelGeometry::discrete) {
        if (lattice.d != 1) throw Error("matching", "discrete kernels are assembled on 1D lattices only");
        if (split.s0 != lattice.n1) throw Error("matching", "discrete kernel sums were taken over a different n1");
        if (std::abs(split.a1 - lattice.a1) > 1e-12 * lattice.a1) {
            throw Error("matching", "discrete kernel spacing differs from the lattice spacing");
        }
        const double s2 = static_cast<double>(split.s2);
        op.hop = broadcast(split.h1, n) * (s2 / (2.0 * split.a1 * split.a1));
        op.onsite = broadcast(split.delta_h_diag(), n);
        return op;
    }
    if (split.d != lattice.d) throw Error("matching", "kernel dimension differs from the lattice dimension");
    const double a2 = lattice.a1 * lattice.a1;
    op.hop = broadcast(split.h1, n) * (split.laplacian_weight() / a2);
    const VectorXc h0 = broadcast(split.h0, n);
    const VectorXc h1 = broadcast(split.h1, n);
    op.onsite = (h0 + h1) * split.box_volume() - op.hop * (2.0 * lattice.d);
    return op;
}

SparseMatrixC adjacency_matrix(const LatticeSpec& lattice) {
    const Eigen::Index n = lattice.site_count();
    std::vector<Eigen::Triplet<Complex>> entries;
    for (Eigen::Index s = 0; s < n; ++s) {
        for (int axis = 0; axis < lattice.d; ++axis) {
            entries.emplace_back(s, lattice.shifted(s, axis, -1), 1.0);
            entries.emplace_back(s, lattice.shifted(s, axis, +1), 1.0);
        }
    }
    SparseMatrixC w(n, n);
    w.setFromTriplets(entries.begin(), entries.end());
    return w;
}

}  // namespace sllab
