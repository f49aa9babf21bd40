#include "sllab/series_sums.hpp"

#include <cmath>

namespace sllab {

namespace {

double factorial(int n) {
    double out = 1.0;
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

void require_axis(int d, int axis) {
    if (axis < 1 || axis > d) {
        throw Error("series_sums", "axis " + std::to_string(axis) + " out of range 1.." + std::to_string(d));
    }
}

}  // namespace

LatticeSums lattice_moment_sums(int n1) {
    if (n1 < 3 || n1 % 2 == 0) throw Error("series_sums", "odd site count required (got " + std::to_string(n1) + ")");
    // 2 n'^3 stays inside int64 for n' <= 1e6.
    if (n1 > 2'000'001) throw Error("series_sums", "site count too large for exact integer sums");

    const std::int64_t half = (n1 - 1) / 2;
    LatticeSums sums;
    sums.s0 = n1;
    sums.s1 = 0;
    // (2/3) n'^3 + n'^2 + n'/3 written over a common denominator.
    sums.s2 = (2 * half * half * half + 3 * half * half + half) / 3;

    for (std::int64_t dj = -half; dj <= half; ++dj) {
        sums.s0_brute += 1;
        sums.s1_brute += dj;
        sums.s2_brute += dj * dj;
    }
    return sums;
}

double leading_order_s2(int n1) {
    const double half = 0.5 * (n1 - 1);
    return 2.0 / 3.0 * half * half * half;
}

double interval_moment(double length, int order, bool divide_by_factorial) {
    if (!(length > 0.0)) throw Error("series_sums", "interval half-length must be positive");
    if (order < 0) throw Error("series_sums", "moment order must be >= 0");
    if (order % 2 == 1) return 0.0;
    double value = 2.0 * std::pow(length, order + 1) / (order + 1);
    if (divide_by_factorial) value /= factorial(order);
    return value;
}

double box_volume(int d, double length) {
    if (d < 1) throw Error("series_sums", "dimension must be >= 1");
    if (!(length > 0.0)) throw Error("series_sums", "box half-length must be positive");
    return std::pow(2.0 * length, d);
}

double box_second_moment(int d, double length, int axis, int axis_prime) {
    if (d < 1) throw Error("series_sums", "dimension must be >= 1");
    require_axis(d, axis);
    require_axis(d, axis_prime);
    if (axis != axis_prime) return 0.0;
    return interval_moment(length, 2) * std::pow(2.0 * length, d - 1);
}

double laplacian_weight(int d, double length) {
    if (d < 1) throw Error("series_sums", "dimension must be >= 1");
    if (!(length > 0.0)) throw Error("series_sums", "cutoff length must be positive");
    return std::pow(length, 3) / 3.0 * std::pow(2.0 * length, d - 1);
}

RemainderMoment remainder_moment(double l_cut, int order, double h1_value, int d) {
    if (order < 3) throw Error("series_sums", "remainder orders start at n = 3");
    if (!(l_cut > 0.0)) throw Error("series_sums", "cutoff length must be positive");
    if (d < 1) throw Error("series_sums", "dimension must be >= 1");
    const double transverse = std::pow(2.0 * l_cut, d - 1);
    RemainderMoment out;
    out.formula = 2.0 * h1_value / factorial(order) * std::pow(l_cut, order + 1) / (order + 1) * transverse;
    out.exact = h1_value * interval_moment(l_cut, order, true) * transverse;
    return out;
}

RemainderCoefficients remainder_coefficients(const PhysicalConstants& constants, int d, double l_cut, int n_max) {
    if (!(constants.m_eff > 0.0) || !(constants.hbar > 0.0)) {
        throw Error("series_sums", "hbar and m_eff must be positive");
    }
    RemainderCoefficients out;
    out.c_d = -constants.hbar * constants.hbar / (2.0 * constants.m_eff);
    out.c = 3.0 * out.c_d;
    const double h1 = out.c_d / laplacian_weight(d, l_cut);
    for (int n = 3; n <= n_max; ++n) {
        out.c_n[n] = 2.0 * out.c / (factorial(n) * (n + 1));
        out.r_n[n] = std::abs(remainder_moment(l_cut, n, h1, d).formula);
    }
    return out;
}

MomentSums moment_sums(int n1, int d, double length, int max_order) {
    const LatticeSums lattice = lattice_moment_sums(n1);
    MomentSums out;
    out.s0 = lattice.s0;
    out.s1 = lattice.s1;
    out.s2 = lattice.s2;
    for (int n = 0; n <= max_order; ++n) out.interval_by_order[n] = interval_moment(length, n);
    out.box_volume = box_volume(d, length);
    out.box_second_moments.resize(d, d);
    for (int l = 1; l <= d; ++l) {
        for (int lp = 1; lp <= d; ++lp) out.box_second_moments(l - 1, lp - 1) = box_second_moment(d, length, l, lp);
    }
    return out;
}

}  // namespace sllab
