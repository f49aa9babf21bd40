#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "sllab/integrators.hpp"
#include "sllab/rng.hpp"
#include "sllab/stochastic_ensemble.hpp"

using namespace sllab;

namespace {

StochasticHamiltonianModel discrete_model(NoiseKind kind, double sigma, std::uint64_t seed = 17, int n1 = 11) {
    StochasticHamiltonianModel model;
    model.lattice = make_lattice(1, n1, 1.0);
    model.mean_split = match_discrete(2.0, 1.0, 1.0, n1).split;
    model.noise_kind = kind;
    model.noise_sigma = sigma;
    model.noise_kernel = adjacency_matrix(model.lattice);
    model.master_seed = seed;
    return model;
}

WaveField probe_state(const LatticeSpec& lattice) {
    return gaussian_packet(lattice, 1.5, {2.0 * 3.141592653589793 / (lattice.n1 * lattice.a1)}, 1.0);
}

double max_abs(const VectorXc& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("time grid sampling") {
    CHECK(TimeGrid{0.1, 10, 3}.sampled_steps() == std::vector<int>{0, 3, 6, 9, 10});
    CHECK(TimeGrid{0.1, 10, 5}.sampled_steps() == std::vector<int>{0, 5, 10});
    CHECK(TimeGrid{0.1, 1, 7}.sampled_steps() == std::vector<int>{0, 1});
    CHECK_THROWS_AS(TimeGrid({0.0, 10, 1}).validate(), Error);
    CHECK_THROWS_AS(TimeGrid({0.1, 0, 1}).validate(), Error);
    CHECK_THROWS_AS(TimeGrid({0.1, 5, 0}).validate(), Error);
}

TEST_CASE("counter rng draws are standard normal and reproducible") {
    CHECK(noise_draw(1, 2, 3) == noise_draw(1, 2, 3));
    CHECK(noise_draw(1, 2, 3) != noise_draw(1, 2, 4));
    CHECK(noise_draw(1, 2, 3, 0) != noise_draw(1, 2, 3, 1));
    CHECK(noise_draw(1, 2, 3) != noise_draw(2, 2, 3));
    const int n = 200000;
    double mean = 0.0;
    double second = 0.0;
    double lag = 0.0;
    double previous = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = noise_draw(99, static_cast<std::uint64_t>(i % 1000), static_cast<std::uint64_t>(i / 1000));
        mean += x;
        second += x * x;
        lag += x * previous;
        previous = x;
    }
    mean /= n;
    second /= n;
    lag /= n;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
    CHECK(std::abs(second - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(lag) < 5.0 / std::sqrt(n));
    CHECK(mix64(0) == 0);
    CHECK(mix64(1) != mix64(2));
}

TEST_CASE("zero generator leaves the field unchanged") {
    StochasticHamiltonianModel model = discrete_model(NoiseKind::none, 0.0);
    model.mean_split.h0.setZero();
    model.mean_split.h1.setZero();
    const WaveField psi0 = probe_state(model.lattice);
    const Trajectory t = evolve_realization(model, psi0, TimeGrid{0.01, 50, 10}, 0);
    CHECK(t.size() == 6);
    for (const WaveField& f : t) CHECK((f.values - psi0.values).norm() == 0.0);
    CHECK(t.back().time == doctest::Approx(0.5));
}

TEST_CASE("noiseless realization is bit-identical to deterministic Euler") {
    const StochasticHamiltonianModel model = discrete_model(NoiseKind::none, 0.3);
    const WaveField psi0 = probe_state(model.lattice);
    const TimeGrid grid{1e-3, 400, 40};
    EvolutionProblem problem;
    problem.kind = EquationKind::discrete_sl;
    problem.coefficients.split = model.mean_split;
    problem.lattice = model.lattice;
    problem.grid = grid;
    problem.scheme = Scheme::euler;
    const Trajectory det = evolve_deterministic(problem, psi0).trajectory;
    const Trajectory real = evolve_realization(model, psi0, grid, 5);
    REQUIRE(det.size() == real.size());
    for (std::size_t i = 0; i < det.size(); ++i) CHECK((det[i].values - real[i].values).norm() == 0.0);

    const EnsembleStats stats = ensemble_average(model, psi0, grid, 8, 2);
    for (std::size_t i = 0; i < det.size(); ++i) {
        CHECK((stats.mean_trajectory[i].values - det[i].values).norm() == 0.0);
        CHECK(stats.stderr_trajectory[i].maxCoeff() == 0.0);
    }
}

TEST_CASE("realizations are reproducible and distinct") {
    const StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.3);
    const WaveField psi0 = probe_state(model.lattice);
    const TimeGrid grid{1e-3, 200, 50};
    const Trajectory a = evolve_realization(model, psi0, grid, 3);
    const Trajectory b = evolve_realization(model, psi0, grid, 3);
    const Trajectory c = evolve_realization(model, psi0, grid, 4);
    CHECK((a.back().values - b.back().values).norm() == 0.0);
    CHECK((a.back().values - c.back().values).norm() > 0.0);
}

TEST_CASE("ensemble statistics do not depend on the worker count") {
    const StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.3);
    const WaveField psi0 = probe_state(model.lattice);
    const TimeGrid grid{1e-3, 100, 25};
    const EnsembleStats serial = ensemble_average(model, psi0, grid, 300, 1);
    const EnsembleStats parallel = ensemble_average(model, psi0, grid, 300, 4);
    for (std::size_t i = 0; i < serial.mean_trajectory.size(); ++i) {
        CHECK(max_abs(serial.mean_trajectory[i].values - parallel.mean_trajectory[i].values) <= 1e-13);
        CHECK((serial.stderr_trajectory[i] - parallel.stderr_trajectory[i]).cwiseAbs().maxCoeff() <= 1e-13);
    }
    CHECK(serial.realization_count == 300);
}

TEST_CASE("standard error follows the inverse square-root law") {
    const StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.3);
    const WaveField psi0 = probe_state(model.lattice);
    const TimeGrid grid{1e-3, 200, 200};
    const EnsembleStats small = ensemble_average(model, psi0, grid, 500, 0);
    const EnsembleStats large = ensemble_average(model, psi0, grid, 2000, 0);
    const double ratio = small.stderr_trajectory.back().mean() / large.stderr_trajectory.back().mean();
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    CHECK(small.stderr_trajectory.back().minCoeff() >= 0.0);
}

TEST_CASE("standard errors bracket the deterministic reference across seeds") {
    int inside = 0;
    int cells = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.3, seed);
        const WaveField psi0 = probe_state(model.lattice);
        EvolutionProblem problem;
        problem.coefficients.split = model.mean_split;
        problem.lattice = model.lattice;
        problem.grid = TimeGrid{1e-3, 200, 20};
        const Trajectory det = evolve_deterministic(problem, psi0).trajectory;
        const EnsembleStats stats = ensemble_average(model, psi0, problem.grid, 400);
        for (std::size_t t = 1; t < det.size(); ++t) {
            for (Eigen::Index s = 0; s < psi0.values.size(); ++s) {
                ++cells;
                if (std::abs(stats.mean_trajectory[t].values[s] - det[t].values[s]) <= 4.0 * stats.stderr_trajectory[t][s]) {
                    ++inside;
                }
            }
        }
    }
    CHECK(static_cast<double>(inside) / cells >= 0.99);
}

TEST_CASE("factorization diagnostic") {
    const StochasticHamiltonianModel none = discrete_model(NoiseKind::none, 0.5);
    const WaveField probe = probe_state(none.lattice);
    const FactorizationReport exact = factorization_diagnostic(none, probe, 100);
    CHECK(exact.gap == 0.0);
    CHECK((exact.lhs - exact.rhs).norm() == 0.0);

    const FactorizationReport independent =
        factorization_diagnostic(discrete_model(NoiseKind::additive_iid, 0.5), probe, 10000);
    CHECK(independent.stderr_bound > 0.0);
    CHECK(independent.within(4.0));

    const FactorizationReport correlated =
        factorization_diagnostic(discrete_model(NoiseKind::state_correlated, 0.5), probe, 10000);
    CHECK(correlated.gap > 4.0 * correlated.stderr_bound);

    CHECK_THROWS_AS(factorization_diagnostic(none, probe, 99), Error);
}

TEST_CASE("non-Hermitian noise keeps the additive factorization") {
    StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.4);
    model.hermitian_noise = false;
    SparseMatrixC w(model.lattice.site_count(), model.lattice.site_count());
    for (Eigen::Index i = 0; i + 1 < w.rows(); ++i) w.insert(i, i + 1) = Complex(0.3, 1.0);
    model.noise_kernel = w;
    const FactorizationReport report = factorization_diagnostic(model, probe_state(model.lattice), 5000);
    CHECK(report.within(4.0));
}

TEST_CASE("ensemble errors") {
    const StochasticHamiltonianModel model = discrete_model(NoiseKind::additive_iid, 0.3);
    const WaveField psi0 = probe_state(model.lattice);
    CHECK_THROWS_AS(ensemble_average(model, psi0, TimeGrid{1e-3, 10, 1}, 1), Error);
    const WaveField wrong = probe_state(make_lattice(1, 13, 1.0));
    CHECK_THROWS_AS(evolve_realization(model, wrong, TimeGrid{1e-3, 10, 1}, 0), Error);
    StochasticHamiltonianModel bad_kernel = model;
    bad_kernel.noise_kernel = SparseMatrixC(3, 3);
    CHECK_THROWS_AS(evolve_realization(bad_kernel, psi0, TimeGrid{1e-3, 10, 1}, 0), Error);

    // Euler with a huge step diverges; the error names the realization and step.
    try {
        ensemble_average(model, psi0, TimeGrid{50.0, 400, 100}, 4, 2);
        FAIL("expected overflow");
    } catch (const Error& e) {
        const std::string what = e.what();
        CHECK(what.find("realization 0") != std::string::npos);
        CHECK(what.find("amplitude overflow at step") != std::string::npos);
    }
}
