#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sllab/integrators.hpp"

using namespace sllab;

namespace {

constexpr double kPi = std::numbers::pi;

EvolutionProblem discrete_problem(double e0, double a, int n1, double a1, TimeGrid grid, Scheme scheme) {
    EvolutionProblem p;
    p.kind = EquationKind::discrete_sl;
    p.coefficients = match_discrete(e0, a, a1, n1);
    p.lattice = make_lattice(1, n1, a1);
    p.grid = grid;
    p.scheme = scheme;
    return p;
}

double relative_norm_drift(const Trajectory& t) {
    const double n0 = t.front().squared_norm();
    double worst = 0.0;
    for (const WaveField& f : t) worst = std::max(worst, std::abs(std::sqrt(f.squared_norm() / n0) - 1.0));
    return worst;
}

/// Spatial mean and variance of |psi| on a 1D lattice.
std::pair<double, double> moments_of(const WaveField& f) {
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (Eigen::Index s = 0; s < f.values.size(); ++s) {
        const double w = std::abs(f.values[s]);
        const double x = f.lattice.coordinate(s, 0);
        mass += w;
        first += w * x;
        second += w * x * x;
    }
    const double mean = first / mass;
    return {mass, second / mass - mean * mean};
}

}  // namespace

TEST_CASE("zero Hamiltonian gives a constant trajectory") {
    for (Scheme scheme : {Scheme::euler, Scheme::norm_preserving}) {
        EvolutionProblem p = discrete_problem(0.0, 0.0, 7, 1.0, TimeGrid{0.1, 20, 5}, scheme);
        const WaveField psi0 = gaussian_packet(p.lattice, 1.0, {0.5}, 1.0);
        const EvolutionResult r = evolve_deterministic(p, psi0);
        CHECK(r.trajectory.size() == 5);
        for (const WaveField& f : r.trajectory) CHECK((f.values - psi0.values).norm() == 0.0);
    }
}

TEST_CASE("discrete plane wave evolves by the exact one-step multiplier") {
    const double dt = 0.01;
    const int steps = 300;
    for (int m : {0, 1, 2}) {
        const double k = 2.0 * kPi * m / 5.0;
        const double omega = 2.0 - 2.0 * std::cos(k);
        for (Scheme scheme : {Scheme::euler, Scheme::norm_preserving}) {
            const EvolutionProblem p = discrete_problem(2.0, 1.0, 5, 1.0, TimeGrid{dt, steps, steps}, scheme);
            const WaveField psi0 = plane_wave_mode(p.lattice, {m}, 1.0);
            const EvolutionResult r = evolve_deterministic(p, psi0);
            const Complex step = scheme == Scheme::euler
                                     ? Complex(1.0, -omega * dt)
                                     : Complex(1.0, -0.5 * omega * dt) / Complex(1.0, 0.5 * omega * dt);
            const VectorXc expected = std::pow(step, steps) * psi0.values;
            CHECK((r.trajectory.back().values - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("phase fit recovers a synthetic rate through many wraps") {
    const LatticeSpec l = make_lattice(1, 3, 1.0);
    Trajectory t;
    for (int i = 0; i <= 400; ++i) {
        const double time = 0.01 * i;
        t.push_back(WaveField{l, VectorXc::Constant(3, std::polar(2.0, -37.5 * time + 0.3)), time});
    }
    CHECK(fit_phase_rate(t, 1) == doctest::Approx(37.5).epsilon(1e-12));
    CHECK_THROWS_AS(fit_phase_rate(Trajectory(t.begin(), t.begin() + 2), 0), Error);
}

TEST_CASE("dispersion check special cases") {
    const DispersionOptions fast{Scheme::norm_preserving, 1e-3, 2000, 10};
    const DispersionResult zero = dispersion_check(2.0, 1.0, 1.0, 21, 0, {}, fast);
    CHECK(zero.omega_analytic == 0.0);
    CHECK(std::abs(zero.omega_measured) < 1e-12);
    CHECK(zero.rel_error < 1e-12);

    // Odd N1 cannot hold k = pi; the nearest commensurate mode sits next to it.
    const DispersionResult edge = dispersion_check(0.0, 1.0, 1.0, 101, 50, {}, fast);
    CHECK(edge.omega_analytic == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(edge.rel_error < 1e-6);

    for (int k_index : {0, 3, 7}) {
        const DispersionResult flat = dispersion_check(1.7, 0.0, 0.5, 15, k_index, PhysicalConstants{2.0, 1.0}, fast);
        CHECK(flat.omega_analytic == doctest::Approx(0.85));
        CHECK(flat.rel_error < 1e-6);
    }
}

TEST_CASE("Euler phase error shrinks at least linearly with dt") {
    std::vector<double> errors;
    for (double dt : {4e-3, 2e-3, 1e-3}) {
        const int steps = static_cast<int>(std::lround(2.0 / dt));
        const DispersionResult r = dispersion_check(2.0, 1.0, 1.0, 31, 7, {}, DispersionOptions{Scheme::euler, dt, steps, 1});
        errors.push_back(r.rel_error);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 0.9);
}

TEST_CASE("norm-preserving scheme conserves the norm of Hermitian problems") {
    const EvolutionProblem p = discrete_problem(2.0, 1.0, 41, 0.5, TimeGrid{0.01, 1000, 100}, Scheme::norm_preserving);
    const WaveField psi0 = gaussian_packet(p.lattice, 2.0, {1.0}, 1.0);
    CHECK(relative_norm_drift(evolve_deterministic(p, psi0).trajectory) <= 1e-10);

    EvolutionProblem nls;
    nls.kind = EquationKind::nls;
    nls.lattice = make_lattice(1, 41, 0.25);
    const WaveField g = gaussian_packet(nls.lattice, 1.0, {2.0}, 1.5);
    nls.coefficients = match_nls(1.0, -0.5, 1, nls.lattice.l_cut, g.values, {});
    nls.nls = NlsCoefficients{1.0, -0.5};
    nls.grid = TimeGrid{0.005, 1000, 100};
    nls.scheme = Scheme::norm_preserving;
    CHECK(relative_norm_drift(evolve_deterministic(nls, g).trajectory) <= 1e-10);
}

TEST_CASE("Euler stability warning") {
    const WaveField psi0 = plane_wave_mode(make_lattice(1, 11, 1.0), {1}, 1.0);
    const EvolutionResult fine =
        evolve_deterministic(discrete_problem(2.0, 1.0, 11, 1.0, TimeGrid{1e-3, 1000, 100}, Scheme::euler), psi0);
    CHECK(fine.warnings.empty());
    CHECK(fine.multiplier_bound >= 1.0);
    const EvolutionResult coarse =
        evolve_deterministic(discrete_problem(2.0, 1.0, 11, 1.0, TimeGrid{0.2, 50, 10}, Scheme::euler), psi0);
    CHECK_FALSE(coarse.warnings.empty());

    EvolutionProblem heat;
    heat.kind = EquationKind::heat;
    heat.lattice = make_lattice(1, 41, 0.1);
    heat.coefficients = match_heat(1.0, 0.0, 1, heat.lattice.l_cut, {});
    heat.grid = TimeGrid{0.0025, 20, 10};
    const WaveField g = gaussian_packet(heat.lattice, 0.5, {0.0}, 1.0);
    CHECK(evolve_deterministic(heat, g).warnings.empty());
    heat.grid = TimeGrid{0.011, 20, 10};
    CHECK_FALSE(evolve_deterministic(heat, g).warnings.empty());
}

TEST_CASE("heat equation spreads a Gaussian at rate 2 alpha and grows as exp(mu t)") {
    const double alpha = 0.8;
    const double mu = 0.5;
    EvolutionProblem p;
    p.kind = EquationKind::heat;
    p.lattice = make_lattice(1, 241, 0.05);
    p.coefficients = match_heat(alpha, mu, 1, p.lattice.l_cut, {});
    const double t_end = 0.5;
    const double dt = p.lattice.a1 * p.lattice.a1 / (4.0 * alpha);
    p.grid = TimeGrid{dt, static_cast<int>(std::lround(t_end / dt)), 10};
    // |psi| ~ exp(-x^2 / (4 w^2)) is itself a heat-kernel profile with variance 2 w^2.
    const WaveField psi0 = gaussian_packet(p.lattice, 0.6, {0.0}, 1.0);
    const EvolutionResult r = evolve_deterministic(p, psi0);
    const auto [m0, v0] = moments_of(r.trajectory.front());
    const auto [m1, v1] = moments_of(r.trajectory.back());
    const double elapsed = r.trajectory.back().time;
    CHECK((v1 - v0) / elapsed == doctest::Approx(2.0 * alpha).epsilon(0.01));
    CHECK(m1 / m0 == doctest::Approx(std::exp(mu * elapsed)).epsilon(0.01));
    CHECK(r.warnings.empty());
}

TEST_CASE("nls plane wave phase rate") {
    const int n1 = 101;
    const double a1 = 2.0 * kPi / n1;
    EvolutionProblem p;
    p.kind = EquationKind::nls;
    p.lattice = make_lattice(1, n1, a1);
    const WaveField psi0 = plane_wave_mode(p.lattice, {1}, 1.0);
    p.coefficients = match_nls(1.0, -0.5, 1, p.lattice.l_cut, psi0.values, {});
    p.nls = NlsCoefficients{1.0, -0.5};
    p.grid = TimeGrid{1e-3, 1000, 10};
    p.scheme = Scheme::norm_preserving;
    const EvolutionResult r = evolve_deterministic(p, psi0);
    const double omega = fit_phase_rate(r.trajectory, 0);
    CHECK(omega == doctest::Approx(1.5).epsilon(1e-3));
    CHECK(relative_norm_drift(r.trajectory) <= 1e-6);
}

TEST_CASE("continuum and discrete forms agree at d = 1") {
    for (double a1 : {0.4, 0.2, 0.1}) {
        const int n1 = 41;
        const double e0 = 2.0;
        const double a = 1.0 / (a1 * a1);
        const EvolutionProblem disc = discrete_problem(e0, a, n1, a1, TimeGrid{1e-4, 200, 200}, Scheme::norm_preserving);
        EvolutionProblem cont = disc;
        cont.kind = EquationKind::continuum_sl;
        // m_eff = hbar^2 / (2 A a1^2) and V = E0 - 2A reproduce the nearest-neighbour operator.
        const PhysicalConstants constants{1.0, 1.0 / (2.0 * a * a1 * a1)};
        cont.coefficients = match_ddim(Eigen::VectorXd::Constant(1, e0 - 2.0 * a), 1, disc.lattice.l_cut, constants);
        cont.constants = constants;
        const WaveField psi0 = gaussian_packet(disc.lattice, 3.0 * a1, {0.0}, 1.0);
        const VectorXc x = evolve_deterministic(disc, psi0).trajectory.back().values;
        const VectorXc y = evolve_deterministic(cont, psi0).trajectory.back().values;
        CHECK((x - y).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("remainder study") {
    std::vector<double> ls;
    for (int i = 0; i <= 12; ++i) ls.push_back(std::pow(10.0, -3.0 + 0.25 * i));
    for (int d : {1, 2}) {
        const RemainderStudyResult r = remainder_study(ls, 6, d, {});
        CHECK(r.monotone_decay);
        CHECK(r.rows.size() == ls.size() * 4);
        for (int n : {4, 6}) CHECK(std::abs(r.fitted_slopes.at(n) - (n - 2)) <= 1e-6);
        CHECK(std::abs(r.fitted_slopes.at(3) - 1.0) <= 1e-6);
        for (const RemainderRow& row : r.rows) {
            if (row.n % 2 == 1) {
                CHECK(row.exact_value == 0.0);
            } else {
                CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-13));
            }
        }
    }
    // n = 3, L = 0.1, unit constants: C_3 L = (-3/2)/12 * 0.1.
    const RemainderStudyResult one = remainder_study({0.1, 1.0, 100.0}, 5, 1, {});
    CHECK(one.rows.front().formula_value == doctest::Approx(-0.0125).epsilon(1e-13));
    CHECK_THROWS_AS(remainder_study({0.1, 1.0}, 6, 1, {}), Error);
    CHECK_THROWS_AS(remainder_study({0.1, 1.0, 10.0}, 6, 1, {}), Error);
    CHECK_THROWS_AS(remainder_study(ls, 4, 1, {}), Error);
}

TEST_CASE("ensemble comparison passes for independent noise and fails for the correlated control") {
    StochasticHamiltonianModel model;
    model.lattice = make_lattice(1, 11, 1.0);
    model.mean_split = match_discrete(2.0, 1.0, 1.0, 11).split;
    model.noise_kernel = adjacency_matrix(model.lattice);
    model.noise_sigma = 0.3;
    const WaveField psi0 = gaussian_packet(model.lattice, 1.5, {2.0 * kPi / 11.0}, 1.0);
    const TimeGrid grid{1e-3, 1000, 50};

    model.noise_kind = NoiseKind::none;
    const ComparisonReport quiet = compare_ensemble_to_deterministic(model, psi0, grid, 4);
    CHECK(quiet.pass);
    CHECK(quiet.max_normalized_gap == 0.0);

    int independent_pass = 0;
    int correlated_fail = 0;
    const int seeds = 20;
    for (int seed = 1; seed <= seeds; ++seed) {
        model.master_seed = static_cast<std::uint64_t>(seed);
        model.noise_kind = NoiseKind::additive_iid;
        if (compare_ensemble_to_deterministic(model, psi0, grid, 1000).pass) ++independent_pass;
        model.noise_kind = NoiseKind::state_correlated;
        if (!compare_ensemble_to_deterministic(model, psi0, grid, 1000).pass) ++correlated_fail;
    }
    CHECK(independent_pass >= 19);
    CHECK(correlated_fail >= 19);
}

TEST_CASE("evolution errors") {
    EvolutionProblem p = discrete_problem(2.0, 1.0, 11, 1.0, TimeGrid{1e-3, 10, 1}, Scheme::euler);
    CHECK_THROWS_AS(evolve_deterministic(p, plane_wave_mode(make_lattice(1, 13, 1.0), {1}, 1.0)), Error);
    const WaveField psi0 = plane_wave_mode(p.lattice, {1}, 1.0);
    EvolutionProblem mismatched = p;
    mismatched.kind = EquationKind::continuum_sl;
    CHECK_THROWS_AS(evolve_deterministic(mismatched, psi0), Error);
    EvolutionProblem nls = p;
    nls.kind = EquationKind::nls;
    nls.coefficients = match_nls(1.0, -0.5, 1, p.lattice.l_cut, psi0.values, {});
    CHECK_THROWS_AS(evolve_deterministic(nls, psi0), Error);
    EvolutionProblem blowup = p;
    blowup.grid = TimeGrid{100.0, 200, 10};
    CHECK_THROWS_WITH_AS(evolve_deterministic(blowup, psi0), doctest::Contains("amplitude overflow at step"), Error);
}
