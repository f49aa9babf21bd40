#pragma once

#include <cstdint>
#include <map>

#include <Eigen/Dense>

#include "sllab/lattice.hpp"

namespace sllab {

/// Lattice sums over the centred offset range {-n', ..., n'} with n' = (n1-1)/2:
/// s0 = sum 1, s1 = sum dj, s2 = sum dj^2. Closed forms and direct summation
/// are both kept so callers can compare them.
struct LatticeSums {
    std::int64_t s0 = 0;
    std::int64_t s1 = 0;
    std::int64_t s2 = 0;
    std::int64_t s0_brute = 0;
    std::int64_t s1_brute = 0;
    std::int64_t s2_brute = 0;

    bool consistent() const { return s0 == s0_brute && s1 == s1_brute && s2 == s2_brute; }
};

LatticeSums lattice_moment_sums(int n1);

/// s2 ~ (2/3) n'^3, the large-lattice approximation of the second sum.
double leading_order_s2(int n1);

/// Integral of t^n over [-L, L]; zero for odd n, 2 L^(n+1)/(n+1) for even n.
/// With `divide_by_factorial` the result is additionally divided by n!.
double interval_moment(double length, int order, bool divide_by_factorial = false);

/// (2L)^d
double box_volume(int d, double length);

/// Integral of t_l * t_l' over the box [-L, L]^d, axes numbered from 1.
double box_second_moment(int d, double length, int axis, int axis_prime);

/// (L^3/3)(2L)^(d-1): the weight multiplying H1 in front of the Laplacian.
double laplacian_weight(int d, double length);

struct RemainderMoment {
    /// 2 H1 L^(n+1) / (n! (n+1)) * (2L)^(d-1), nonzero for every n.
    double formula = 0.0;
    /// The same integral evaluated over the symmetric interval: zero for odd n.
    double exact = 0.0;
};

/// Order-n tail moment of the Taylor-expanded kernel truncated at `l_cut`.
RemainderMoment remainder_moment(double l_cut, int order, double h1_value, int d);

/// Constants of the remainder power law for a kernel normalised to a given m_eff.
struct RemainderCoefficients {
    /// -3 hbar^2 / (2 m_eff)
    double c = 0.0;
    /// -hbar^2 / (2 m_eff), the d-dimensional kinetic constant
    double c_d = 0.0;
    /// 2 C / (n! (n+1))
    std::map<int, double> c_n;
    /// remainder magnitude |H1 I_n / n!| at the given cutoff
    std::map<int, double> r_n;
};

RemainderCoefficients remainder_coefficients(const PhysicalConstants& constants, int d, double l_cut,
                                             int n_max);

/// Bundle of the lattice sums and continuum moments for one geometry.
struct MomentSums {
    std::int64_t s0 = 0;
    std::int64_t s1 = 0;
    std::int64_t s2 = 0;
    std::map<int, double> interval_by_order;
    double box_volume = 0.0;
    Eigen::MatrixXd box_second_moments;
};

MomentSums moment_sums(int n1, int d, double length, int max_order);

}  // namespace sllab
