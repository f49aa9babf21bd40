#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sllab/error.hpp"

namespace sllab {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;

/// Periodic hypercubic lattice with an odd, centred index range on every axis.
///
/// Sites are stored flat in row-major axis order: the last axis varies
/// fastest, so site (i_0, ..., i_{d-1}) lives at sum_k i_k * n1^(d-1-k).
/// Index i_k on an axis sits at coordinate (i_k - n1_half) * a1, which places
/// the centre site of every axis at the origin.
struct LatticeSpec {
    int d = 1;
    int n1 = 3;
    double a1 = 1.0;
    int n1_half = 1;
    double l_half = 1.0;
    double l_cut = 1.0;

    Eigen::Index site_count() const;
    Eigen::Index stride(int axis) const;
    /// Index of `site` along `axis` (0 .. n1-1).
    int axis_index(Eigen::Index site, int axis) const;
    /// Physical coordinate of `site` along `axis`.
    double coordinate(Eigen::Index site, int axis) const;
    /// Site reached by moving `offset` steps along `axis`, wrapping periodically.
    Eigen::Index shifted(Eigen::Index site, int axis, int offset) const;

    bool operator==(const LatticeSpec&) const = default;
};

/// hbar defaults to 1; m_eff is only consulted by matchers that need it.
struct PhysicalConstants {
    double hbar = 1.0;
    double m_eff = 1.0;
};

/// Complex amplitudes over every site of a lattice at one instant.
struct WaveField {
    LatticeSpec lattice;
    VectorXc values;
    double time = 0.0;

    /// sum |psi_i|^2 * a1^d
    double squared_norm() const;
};

LatticeSpec make_lattice(int d, int n1, double a1, std::optional<double> l_cut = std::nullopt);

/// f[i-1] - 2 f[i] + f[i+1] along `axis`, periodic, not divided by a1^2.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> second_central_difference(
    const LatticeSpec& lattice, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f, int axis) {
    if (axis < 0 || axis >= lattice.d) {
        throw Error("lattice", "axis " + std::to_string(axis) + " out of range for d=" +
                                   std::to_string(lattice.d));
    }
    if (f.size() != lattice.site_count()) {
        throw Error("lattice", "field size does not match lattice site count");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(f.size());
    for (Eigen::Index s = 0; s < f.size(); ++s) {
        out[s] = f[lattice.shifted(s, axis, -1)] - Scalar(2) * f[s] + f[lattice.shifted(s, axis, +1)];
    }
    return out;
}

WaveField second_central_difference(const WaveField& f, int axis);

/// Sum of the 2d nearest-neighbour values at every site (periodic).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> neighbor_sum(const LatticeSpec& lattice,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(f.size());
    for (int axis = 0; axis < lattice.d; ++axis) {
        for (Eigen::Index s = 0; s < f.size(); ++s) {
            out[s] += f[lattice.shifted(s, axis, -1)] + f[lattice.shifted(s, axis, +1)];
        }
    }
    return out;
}

/// Sum over axes of the scaled second difference, i.e. the lattice Laplacian.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> laplacian(const LatticeSpec& lattice,
                                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& f) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(f.size());
    for (int axis = 0; axis < lattice.d; ++axis) out += second_central_difference(lattice, f, axis);
    return out / (lattice.a1 * lattice.a1);
}

/// amplitude * exp(i k.x). With `strict`, every k component must be a multiple
/// of 2*pi/(n1*a1) so the field is exactly periodic.
WaveField plane_wave(const LatticeSpec& lattice, const std::vector<double>& k, Complex amplitude,
                     bool strict = true);

/// Plane wave with integer mode numbers m: k_l = 2*pi*m_l/(n1*a1).
WaveField plane_wave_mode(const LatticeSpec& lattice, const std::vector<int>& modes, Complex amplitude);

/// Isotropic Gaussian amplitude * exp(-|x|^2/(4 width^2)) * exp(i k.x) centred at the origin,
/// so |psi|^2 has per-axis variance width^2.
WaveField gaussian_packet(const LatticeSpec& lattice, double width, const std::vector<double>& k,
                          Complex amplitude);

/// N particles in d dimensions evolve on an N*d dimensional lattice.
int map_many_particle(int particles, int d);

}  // namespace sllab
