#include "sllab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sllab {

Eigen::Index LatticeSpec::site_count() const {
    Eigen::Index count = 1;
    for (int k = 0; k < d; ++k) count *= n1;
    return count;
}

Eigen::Index LatticeSpec::stride(int axis) const {
    Eigen::Index s = 1;
    for (int k = axis + 1; k < d; ++k) s *= n1;
    return s;
}

int LatticeSpec::axis_index(Eigen::Index site, int axis) const {
    return static_cast<int>((site / stride(axis)) % n1);
}

double LatticeSpec::coordinate(Eigen::Index site, int axis) const {
    return (axis_index(site, axis) - n1_half) * a1;
}

Eigen::Index LatticeSpec::shifted(Eigen::Index site, int axis, int offset) const {
    const Eigen::Index st = stride(axis);
    const int i = axis_index(site, axis);
    const int j = ((i + offset) % n1 + n1) % n1;
    return site + (j - i) * st;
}

double WaveField::squared_norm() const {
    return values.squaredNorm() * std::pow(lattice.a1, lattice.d);
}

LatticeSpec make_lattice(int d, int n1, double a1, std::optional<double> l_cut) {
    if (d < 1) throw Error("lattice", "dimension must be >= 1");
    if (n1 < 3) throw Error("lattice", "site count per axis must be >= 3");
    if (n1 % 2 == 0) throw Error("lattice", "odd site count required (got " + std::to_string(n1) + ")");
    if (!(a1 > 0.0) || !std::isfinite(a1)) throw Error("lattice", "lattice spacing must be positive");

    LatticeSpec spec;
    spec.d = d;
    spec.n1 = n1;
    spec.a1 = a1;
    spec.n1_half = (n1 - 1) / 2;
    spec.l_half = spec.n1_half * a1;
    // The default cutoff b*sqrt(3) is capped at the lattice extent for n1 == 3.
    spec.l_cut = l_cut.value_or(std::min(a1 * std::numbers::sqrt3, spec.l_half));
    if (!(spec.l_cut > 0.0)) throw Error("lattice", "cutoff length must be positive");
    if (spec.l_cut > spec.l_half * (1.0 + 1e-12)) {
        throw Error("lattice", "cutoff length exceeds the lattice half-length");
    }
    return spec;
}

WaveField second_central_difference(const WaveField& f, int axis) {
    return WaveField{f.lattice, second_central_difference(f.lattice, f.values, axis), f.time};
}

WaveField plane_wave(const LatticeSpec& lattice, const std::vector<double>& k, Complex amplitude, bool strict) {
    if (static_cast<int>(k.size()) != lattice.d) throw Error("lattice", "wavevector dimension mismatch");
    if (strict) {
        const double quantum = 2.0 * std::numbers::pi / (lattice.n1 * lattice.a1);
        for (double kl : k) {
            const double m = kl / quantum;
            if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, std::abs(m))) {
                throw Error("lattice", "wavevector is not commensurate with the periodic box");
            }
        }
    }
    WaveField field{lattice, VectorXc(lattice.site_count()), 0.0};
    for (Eigen::Index s = 0; s < field.values.size(); ++s) {
        double phase = 0.0;
        for (int axis = 0; axis < lattice.d; ++axis) phase += k[axis] * lattice.coordinate(s, axis);
        field.values[s] = amplitude * std::polar(1.0, phase);
    }
    return field;
}

WaveField plane_wave_mode(const LatticeSpec& lattice, const std::vector<int>& modes, Complex amplitude) {
    std::vector<double> k;
    k.reserve(modes.size());
    for (int m : modes) k.push_back(2.0 * std::numbers::pi * m / (lattice.n1 * lattice.a1));
    return plane_wave(lattice, k, amplitude, false);
}

WaveField gaussian_packet(const LatticeSpec& lattice, double width, const std::vector<double>& k,
                          Complex amplitude) {
    if (!(width > 0.0)) throw Error("lattice", "packet width must be positive");
    WaveField field = plane_wave(lattice, k, amplitude, false);
    for (Eigen::Index s = 0; s < field.values.size(); ++s) {
        double r2 = 0.0;
        for (int axis = 0; axis < lattice.d; ++axis) r2 += std::pow(lattice.coordinate(s, axis), 2);
        field.values[s] *= std::exp(-r2 / (4.0 * width * width));
    }
    return field;
}

int map_many_particle(int particles, int d) {
    if (particles < 1 || d < 1) throw Error("lattice", "particle count and dimension must be >= 1");
    return particles * d;
}

}  // namespace sllab
