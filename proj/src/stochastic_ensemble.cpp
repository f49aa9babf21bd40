#include "sllab/stochastic_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "sllab/rng.hpp"

namespace sllab {

namespace {

constexpr std::uint64_t kFrozenStep = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kEvolutionStream = 0;
constexpr std::uint64_t kProbeHamiltonianStream = 1;
constexpr std::uint64_t kProbeStateStream = 2;
constexpr double kOverflow = 1e150;

/// Applies the noise direction W' (or W' scaled by state amplitudes) to a field.
class NoiseOperator {
public:
    explicit NoiseOperator(const StochasticHamiltonianModel& model) : hermitian_(model.hermitian_noise) {
        const Eigen::Index n = model.lattice.site_count();
        if (model.noise_kind == NoiseKind::none) return;
        if (model.noise_kernel.rows() != n || model.noise_kernel.cols() != n) {
            throw Error("stochastic_ensemble", "noise kernel shape does not match the lattice");
        }
        w_ = model.noise_kernel;
        w_adjoint_ = model.noise_kernel.adjoint();
        w_hermitian_ = 0.5 * (w_ + w_adjoint_);
    }

    /// W' x for the additive law.
    VectorXc direction(const VectorXc& x) const { return hermitian_ ? VectorXc(w_hermitian_ * x) : VectorXc(w_ * x); }

    /// (W diag(scale)) x, or its Hermitian part.
    VectorXc scaled(const Eigen::VectorXd& scale, const VectorXc& x) const {
        VectorXc out = w_ * scale.cast<Complex>().cwiseProduct(x);
        if (hermitian_) {
            out = 0.5 * (out + scale.cast<Complex>().cwiseProduct(w_adjoint_ * x));
        }
        return out;
    }

private:
    bool hermitian_;
    SparseMatrixC w_;
    SparseMatrixC w_adjoint_;
    SparseMatrixC w_hermitian_;
};

void require_compatible(const StochasticHamiltonianModel& model, const WaveField& psi) {
    if (psi.lattice.d != model.lattice.d || psi.lattice.n1 != model.lattice.n1 ||
        psi.values.size() != model.lattice.site_count()) {
        throw Error("stochastic_ensemble", "initial field is not on the model lattice");
    }
}

/// Complex Welford accumulator per site.
struct Accumulator {
    VectorXc mean;
    Eigen::VectorXd m2;
    int count = 0;

    void add(const VectorXc& x) {
        if (count == 0) {
            mean = VectorXc::Zero(x.size());
            m2 = Eigen::VectorXd::Zero(x.size());
        }
        ++count;
        const VectorXc delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += (delta.conjugate().cwiseProduct(x - mean)).real();
    }

    Eigen::VectorXd standard_error() const {
        if (count < 2) return Eigen::VectorXd::Zero(mean.size());
        return (m2.cwiseMax(0.0) / (static_cast<double>(count - 1) * count)).cwiseSqrt();
    }
};

}  // namespace

std::vector<int> TimeGrid::sampled_steps() const {
    validate();
    std::vector<int> out;
    for (int n = 0; n <= steps; n += sample_stride) out.push_back(n);
    if (out.back() != steps) out.push_back(steps);
    return out;
}

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("stochastic_ensemble", "time step must be positive");
    if (steps < 1) throw Error("stochastic_ensemble", "step count must be >= 1");
    if (sample_stride < 1) throw Error("stochastic_ensemble", "sample stride must be >= 1");
}

AssembledOperator StochasticHamiltonianModel::mean_operator() const { return assemble(mean_split, lattice); }

double noise_draw(std::uint64_t master_seed, std::uint64_t realization, std::uint64_t step, std::uint64_t stream) {
    CounterRng rng(master_seed, realization, step, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
}

Trajectory evolve_realization(const StochasticHamiltonianModel& model, const WaveField& psi0, const TimeGrid& grid,
                              std::uint64_t realization_index) {
    const std::vector<int> sampled = grid.sampled_steps();
    require_compatible(model, psi0);
    const AssembledOperator op = model.mean_operator();
    const NoiseOperator noise(model);
    const double hbar = model.constants.hbar;
    const double frozen_xi = model.noise_kind == NoiseKind::state_correlated
                                 ? noise_draw(model.master_seed, realization_index, kFrozenStep, kEvolutionStream)
                                 : 0.0;

    Trajectory out;
    out.reserve(sampled.size());
    VectorXc psi = psi0.values;
    out.push_back(WaveField{psi0.lattice, psi, psi0.time});
    std::size_t next = 1;
    for (int n = 0; n < grid.steps; ++n) {
        VectorXc k = op.apply(psi);
        switch (model.noise_kind) {
            case NoiseKind::none:
                break;
            case NoiseKind::additive_iid: {
                const double xi = noise_draw(model.master_seed, realization_index, static_cast<std::uint64_t>(n));
                k += (model.noise_sigma * xi) * noise.direction(psi);
                break;
            }
            case NoiseKind::state_correlated:
                k += (model.noise_sigma * frozen_xi) * noise.scaled(psi.cwiseAbs2(), psi);
                break;
        }
        euler_update(psi, k, grid.dt, hbar);
        if (!(psi.cwiseAbs().maxCoeff() < kOverflow)) {
            throw Error("stochastic_ensemble", "realization " + std::to_string(realization_index) +
                                                   ": amplitude overflow at step " + std::to_string(n + 1));
        }
        if (next < sampled.size() && sampled[next] == n + 1) {
            out.push_back(WaveField{psi0.lattice, psi, psi0.time + (n + 1) * grid.dt});
            ++next;
        }
    }
    return out;
}

EnsembleStats ensemble_average(const StochasticHamiltonianModel& model, const WaveField& psi0, const TimeGrid& grid,
                               int realization_count, unsigned threads) {
    if (realization_count < 2) throw Error("stochastic_ensemble", "ensemble needs at least 2 realizations");
    const std::size_t sample_count = grid.sampled_steps().size();
    require_compatible(model, psi0);

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(realization_count));
    const int block = static_cast<int>(threads) * 32;

    std::vector<Accumulator> acc(sample_count);
    std::vector<Trajectory> slots(static_cast<std::size_t>(block));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(block));

    for (int start = 0; start < realization_count; start += block) {
        const int count = std::min(block, realization_count - start);
        auto work = [&](unsigned worker) {
            for (int j = static_cast<int>(worker); j < count; j += static_cast<int>(threads)) {
                try {
                    slots[j] = evolve_realization(model, psi0, grid, static_cast<std::uint64_t>(start + j));
                } catch (...) {
                    errors[j] = std::current_exception();
                }
            }
        };
        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        }
        for (int j = 0; j < count; ++j) {
            if (errors[j]) std::rethrow_exception(errors[j]);
            for (std::size_t s = 0; s < sample_count; ++s) acc[s].add(slots[j][s].values);
        }
    }

    EnsembleStats stats;
    stats.realization_count = realization_count;
    const std::vector<int> sampled = grid.sampled_steps();
    for (std::size_t s = 0; s < sample_count; ++s) {
        stats.mean_trajectory.push_back(WaveField{psi0.lattice, acc[s].mean, psi0.time + sampled[s] * grid.dt});
        stats.stderr_trajectory.push_back(acc[s].standard_error());
    }
    return stats;
}

FactorizationReport factorization_diagnostic(const StochasticHamiltonianModel& model, const WaveField& psi_probe,
                                             int samples) {
    if (samples < 100) throw Error("stochastic_ensemble", "factorization diagnostic needs at least 100 samples");
    require_compatible(model, psi_probe);
    const AssembledOperator op = model.mean_operator();
    const VectorXc& probe = psi_probe.values;

    FactorizationReport report;
    if (model.noise_kind == NoiseKind::none) {
        report.lhs = op.apply(probe);
        report.rhs = report.lhs;
        return report;
    }

    const NoiseOperator noise(model);
    const double sigma = model.noise_sigma;
    const bool correlated = model.noise_kind == NoiseKind::state_correlated;
    const VectorXc kick = noise.direction(probe);

    struct Sample {
        double xi;
        VectorXc psi;
        Eigen::VectorXd scale;
    };
    auto draw = [&](int s) {
        const auto r = static_cast<std::uint64_t>(s);
        const double xi = noise_draw(model.master_seed, r, 0, kProbeHamiltonianStream);
        const double eta = correlated ? xi : noise_draw(model.master_seed, r, 0, kProbeStateStream);
        Sample out{xi, probe + Complex(0.0, -sigma * eta) * kick, {}};
        if (correlated) out.scale = out.psi.cwiseAbs2();
        return out;
    };
    // N x: the realization's noise term applied to x (without sigma).
    auto noise_term = [&](const Sample& smp, const VectorXc& x) {
        return correlated ? VectorXc(smp.xi * noise.scaled(smp.scale, x)) : VectorXc(smp.xi * noise.direction(x));
    };

    Accumulator lhs;
    Accumulator psi_mean;
    double xi_mean = 0.0;
    Eigen::VectorXd scale_mean = Eigen::VectorXd::Zero(probe.size());
    for (int s = 0; s < samples; ++s) {
        const Sample smp = draw(s);
        lhs.add(op.apply(smp.psi) + sigma * noise_term(smp, smp.psi));
        psi_mean.add(smp.psi);
        xi_mean += (smp.xi - xi_mean) / (s + 1);
        if (correlated) scale_mean += (smp.xi * smp.scale - scale_mean) / (s + 1);
    }
    // The mean Hamiltonian's noise term applied to x.
    auto mean_noise_term = [&](const VectorXc& x) {
        return correlated ? noise.scaled(scale_mean, x) : VectorXc(xi_mean * noise.direction(x));
    };
    report.lhs = lhs.mean;
    report.rhs = op.apply(psi_mean.mean) + sigma * mean_noise_term(psi_mean.mean);
    report.gap = (report.lhs - report.rhs).cwiseAbs().maxCoeff();

    // lhs - rhs is the sample mean of q = sigma (N_r - Nbar)(psi_r - psibar).
    Accumulator q;
    for (int s = 0; s < samples; ++s) {
        const Sample smp = draw(s);
        const VectorXc centred = smp.psi - psi_mean.mean;
        q.add(sigma * (noise_term(smp, centred) - mean_noise_term(centred)));
    }
    report.stderr_bound = q.standard_error().maxCoeff();
    return report;
}

}  // namespace sllab
