#include "sllab/matching.hpp"

#include <algorithm>
#include <cmath>

#include "sllab/series_sums.hpp"

namespace sllab {

namespace {

constexpr double kTiny = 1e-300;

Complex at(const VectorXc& v, Eigen::Index i) { return v.size() == 1 ? v[0] : v[i]; }

Eigen::Index common_size(const VectorXc& a, const VectorXc& b) {
    if (a.size() != 1 && b.size() != 1 && a.size() != b.size()) {
        throw Error("matching", "coefficient fields have incompatible sizes");
    }
    return std::max(a.size(), b.size());
}

double relative_gap(Complex lhs, Complex rhs, double term_scale = 0.0) {
    const double scale = std::max({std::abs(lhs), std::abs(rhs), term_scale});
    const double diff = std::abs(lhs - rhs);
    return scale < kTiny ? diff : diff / scale;
}

/// `term_scale`, when given, holds the summed magnitudes of the terms making up lhs.
Residual residual(std::string name, const VectorXc& lhs, const VectorXc& rhs,
                  const Eigen::VectorXd& term_scale = Eigen::VectorXd::Zero(1)) {
    Residual r{std::move(name), 0.0};
    const Eigen::Index n = common_size(lhs, rhs);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = term_scale.size() == 1 ? term_scale[0] : term_scale[i];
        r.relative = std::max(r.relative, relative_gap(at(lhs, i), at(rhs, i), scale));
    }
    return r;
}

VectorXc uniform(Complex value) { return VectorXc::Constant(1, value); }

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw Error("matching", std::string(what) + " must be finite");
}

void require_cutoff(int d, double l_cut) {
    if (d < 1) throw Error("matching", "dimension must be >= 1");
    if (!(l_cut > 0.0) || !std::isfinite(l_cut)) throw Error("matching", "zero or negative cutoff length");
}

SplitHamiltonian continuum_split(int d, double l_cut, VectorXc h0, VectorXc h1) {
    SplitHamiltonian split;
    split.geometry = KernelGeometry::continuum;
    split.d = d;
    split.l_cut = l_cut;
    split.h0 = std::move(h0);
    split.h1 = std::move(h1);
    return split;
}

/// Residuals of [H0 + H1] I0 = F0 and H1 (L^3/3)(2L)^(d-1) = F2.
void add_continuum_residuals(MatchedCoefficients& out, const VectorXc& f0, const VectorXc& f2) {
    const SplitHamiltonian& s = out.split;
    const Eigen::Index n = common_size(s.h0, s.h1);
    VectorXc lhs0(n);
    Eigen::VectorXd terms0(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        lhs0[i] = (at(s.h0, i) + at(s.h1, i)) * s.box_volume();
        terms0[i] = (std::abs(at(s.h0, i)) + std::abs(at(s.h1, i))) * s.box_volume();
    }
    out.residuals.push_back(residual("on-site: [H0 + H1] I0 = F0", lhs0, f0, terms0));
    out.residuals.push_back(residual("kinetic: H1 (L^3/3)(2L)^(d-1) = F2", s.h1 * s.laplacian_weight(), f2));
}

}  // namespace

VectorXc SplitHamiltonian::delta_h_diag() const {
    if (geometry != KernelGeometry::discrete) throw Error("matching", "delta H is defined for discrete kernels only");
    const double s0d = static_cast<double>(s0);
    const double s2d = static_cast<double>(s2);
    const Eigen::Index n = common_size(h0, h1);
    VectorXc out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = at(h0, i) * s0d + at(h1, i) * (s0d - s2d / (a1 * a1));
    return out;
}

double SplitHamiltonian::box_volume() const { return sllab::box_volume(d, l_cut); }

double SplitHamiltonian::laplacian_weight() const { return sllab::laplacian_weight(d, l_cut); }

double MatchedCoefficients::max_residual() const {
    double worst = 0.0;
    for (const Residual& r : residuals) worst = std::max(worst, r.relative);
    return worst;
}

MatchedCoefficients match_discrete(double e0, double a, double a1, int n1) {
    require_finite(e0, "E0");
    require_finite(a, "A");
    if (!(a1 > 0.0) || !std::isfinite(a1)) throw Error("matching", "lattice spacing must be positive");
    const LatticeSums sums = lattice_moment_sums(n1);
    const double s0 = static_cast<double>(sums.s0);
    const double s2 = static_cast<double>(sums.s2);

    MatchedCoefficients out;
    out.provenance = "discrete nearest-neighbour lattice";
    SplitHamiltonian& split = out.split;
    split.geometry = KernelGeometry::discrete;
    split.s0 = sums.s0;
    split.s2 = sums.s2;
    split.a1 = a1;
    split.d = 1;
    const double h1 = -2.0 * a1 * a1 * a / s2;
    const double h0 = (2.0 * a1 * a1 * a * s0 + s2 * e0 - 2.0 * a * s2) / (s0 * s2);
    split.h0 = uniform(h0);
    split.h1 = uniform(h1);

    const double terms = std::abs(h0) * s0 + std::abs(h1) * (s0 + s2 / (a1 * a1));
    out.residuals.push_back(residual("on-site: H0 s0 + H1 (s0 - s2/a1^2) = E0", split.delta_h_diag(), uniform(e0),
                                     Eigen::VectorXd::Constant(1, terms)));
    out.residuals.push_back(
        residual("hopping: s2 H1 / (2 a1^2) = -A", uniform(s2 * h1 / (2.0 * a1 * a1)), uniform(-a)));
    return out;
}

MatchedCoefficients match_continuum_1d(double e0, double a, double b, ContinuumMode mode,
                                       std::optional<double> length, const PhysicalConstants& constants) {
    require_finite(e0, "E0");
    require_finite(a, "A");
    if (!(b > 0.0) || !std::isfinite(b)) throw Error("matching", "reference spacing b must be positive");

    double l = 0.0;
    if (mode == ContinuumMode::cutoff) {
        // (1/2) H1 I2 = -A b^2 and H1 I0 = -2A  =>  I2(L) / I0(L) = L^2 / 3 = b^2.
        l = std::sqrt(3.0 * b * b);
    } else {
        if (!length || !(*length > 0.0)) throw Error("matching", "full-length mode needs a positive length");
        l = *length;
    }
    const double i0 = interval_moment(l, 0);
    const double i2 = interval_moment(l, 2);
    const double h0 = e0 / i0;
    const double h1 = -2.0 * a * b * b / i2;

    MatchedCoefficients out;
    out.split = continuum_split(1, l, uniform(h0), uniform(h1));
    out.l_cut = l;
    out.provenance = mode == ContinuumMode::cutoff ? "continuum 1D, cutoff half-width solved from the reference"
                                                   : "continuum 1D, caller-supplied half-length";

    // m_eff = hbar^2 / (2 A b^2) from the reference; A = 0 is a flat band with no kinetic term.
    double kinetic = 0.0;
    if (a != 0.0) {
        const double hbar2 = constants.hbar * constants.hbar;
        out.implied_m_eff = hbar2 / (2.0 * a * b * b);
        kinetic = -hbar2 / (2.0 * *out.implied_m_eff);
    }

    out.residuals.push_back(residual("kinetic: (1/2) H1 I2 = -hbar^2/(2 m_eff)", uniform(0.5 * h1 * i2), uniform(kinetic)));
    if (mode == ContinuumMode::cutoff) {
        out.residuals.push_back(residual("potential: [H0 + H1] I0 = E0 - 2A", uniform((h0 + h1) * i0), uniform(e0 - 2.0 * a),
                                         Eigen::VectorXd::Constant(1, (std::abs(h0) + std::abs(h1)) * i0)));
        out.residuals.push_back(residual("zeroth moment: H1 I0 = -2A", uniform(h1 * i0), uniform(-2.0 * a)));
    } else {
        out.residuals.push_back(residual("on-site: H0 I0 = E0", uniform(h0 * i0), uniform(e0)));
        if (relative_gap(h1 * i0, -2.0 * a) > 1e-12) {
            out.flags.push_back("half-length differs from b*sqrt(3): the kernel weight H1 I0 does not reproduce the "
                                "reference hopping -2A, so this match is not physically meaningful");
        }
    }
    return out;
}

MatchedCoefficients match_ddim(const Eigen::VectorXd& potential, int d, double l_cut, const PhysicalConstants& constants) {
    require_cutoff(d, l_cut);
    if (!(constants.m_eff > 0.0) || !(constants.hbar > 0.0)) throw Error("matching", "hbar and m_eff must be positive");
    if (potential.size() < 1 || !potential.allFinite()) throw Error("matching", "potential must be finite and non-empty");

    const VectorXc f0 = potential.cast<Complex>();
    const VectorXc f2 = uniform(-constants.hbar * constants.hbar / (2.0 * constants.m_eff));
    const double i0 = box_volume(d, l_cut);
    const VectorXc h1 = f2 / laplacian_weight(d, l_cut);
    VectorXc h0 = f0 / i0;
    h0.array() -= h1[0];

    MatchedCoefficients out;
    out.split = continuum_split(d, l_cut, std::move(h0), h1);
    out.l_cut = l_cut;
    out.provenance = "d-dimensional Schrodinger-like";
    out.implied_m_eff = constants.m_eff;
    add_continuum_residuals(out, f0, f2);
    return out;
}

MatchedCoefficients match_heat(double alpha, double mu, int d, double l_cut, const PhysicalConstants& constants) {
    require_cutoff(d, l_cut);
    require_finite(alpha, "alpha");
    require_finite(mu, "mu");
    // -hbar/i = i hbar
    const VectorXc f0 = uniform(Complex(0.0, mu * constants.hbar));
    const VectorXc f2 = uniform(Complex(0.0, alpha * constants.hbar));
    const VectorXc h1 = f2 / laplacian_weight(d, l_cut);
    const VectorXc h0 = uniform(f0[0] / box_volume(d, l_cut) - h1[0]);

    MatchedCoefficients out;
    out.split = continuum_split(d, l_cut, h0, h1);
    out.l_cut = l_cut;
    out.provenance = "heat-like equation";
    add_continuum_residuals(out, f0, f2);
    return out;
}

MatchedCoefficients match_nls(double kappa0, double kappa2, int d, double l_cut, const VectorXc& psi_now,
                              const PhysicalConstants& constants) {
    (void)constants;
    require_cutoff(d, l_cut);
    require_finite(kappa0, "kappa0");
    require_finite(kappa2, "kappa2");
    if (psi_now.size() < 1) throw Error("matching", "nonlinear matcher needs the current field");

    const VectorXc f0 = (kappa0 * psi_now.array().abs2()).cast<Complex>().matrix();
    const VectorXc f2 = uniform(kappa2);
    const VectorXc h1 = f2 / laplacian_weight(d, l_cut);
    VectorXc h0 = f0 / box_volume(d, l_cut);
    h0.array() -= h1[0];

    MatchedCoefficients out;
    out.split = continuum_split(d, l_cut, std::move(h0), h1);
    out.l_cut = l_cut;
    out.provenance = "nonlinear Schrodinger, H0 evaluated from the current field";
    add_continuum_residuals(out, f0, f2);
    return out;
}

MatchedCoefficients match_generic(const VectorXc& f0, const VectorXc& f2, int d, double l_cut,
                                  const PhysicalConstants& constants) {
    require_cutoff(d, l_cut);
    if (f0.size() < 1 || f2.size() < 1 || !f0.allFinite() || !f2.allFinite()) {
        throw Error("matching", "F0 and F2 must be finite and non-empty");
    }
    const Eigen::Index n = common_size(f0, f2);
    const double i0 = box_volume(d, l_cut);
    const double w = laplacian_weight(d, l_cut);

    VectorXc h1 = f2 / w;
    VectorXc h0(n);
    for (Eigen::Index i = 0; i < n; ++i) h0[i] = at(f0, i) / i0 - at(h1, i);

    // Same system as four real equations in (Re H0, Im H0, Re H1, Im H1).
    Eigen::Matrix4d system;
    system << i0, 0, i0, 0,
              0, i0, 0, i0,
              0, 0, w, 0,
              0, 0, 0, w;
    const auto solver = system.colPivHouseholderQr();
    double route_gap = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector4d rhs(at(f0, i).real(), at(f0, i).imag(), at(f2, i).real(), at(f2, i).imag());
        const Eigen::Vector4d x = solver.solve(rhs);
        route_gap = std::max(route_gap, relative_gap(Complex(x[0], x[1]), h0[i]));
        route_gap = std::max(route_gap, relative_gap(Complex(x[2], x[3]), at(h1, i)));
    }

    MatchedCoefficients out;
    out.split = continuum_split(d, l_cut, std::move(h0), std::move(h1));
    out.l_cut = l_cut;
    out.provenance = "generic complex F0, F2";
    add_continuum_residuals(out, f0, f2);
    out.residuals.push_back(Residual{"four real equations agree with the complex solve", route_gap});

    // F2 plays the role of -hbar^2/(2 m_eff).
    bool real_f2 = true;
    bool positive_mass = true;
    for (Eigen::Index i = 0; i < f2.size(); ++i) {
        if (f2[i].imag() != 0.0) real_f2 = false;
        if (!(f2[i].real() < 0.0)) positive_mass = false;
    }
    if (!real_f2) {
        out.flags.push_back("F2 is complex: the implied effective mass is complex");
    } else if (!positive_mass) {
        out.flags.push_back("F2 >= 0 somewhere: the implied effective mass is negative or infinite");
    } else if (f2.size() == 1) {
        out.implied_m_eff = -constants.hbar * constants.hbar / (2.0 * f2[0].real());
    }
    return out;
}

}  // namespace sllab
