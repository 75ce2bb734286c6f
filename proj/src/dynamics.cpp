#include "tpslab/dynamics.hpp"

#include <cmath>
#include <thread>

namespace tpslab::dynamics {

void TimeGrid::validate() const {
    if (!(t_max > 0.0)) fail(errc::config_invalid, "grid.t_max must be > 0");
    if (samples < 1) fail(errc::config_invalid, "grid.samples must be >= 1");
}

CVec evolve_state(const CVec& psi0, const qla::SpectralDecomposition& spec, double t) {
    if (psi0.size() != spec.dim())
        fail(errc::dimension_mismatch, "evolve_state: state dim != spectrum dim");
    CVec coeffs = spec.frame.adjoint() * psi0;
    for (int l = 0; l < spec.dim(); ++l) {
        const double phase = -spec.eigenvalues(l) * t;
        coeffs(l) *= cx(std::cos(phase), std::sin(phase));
    }
    return spec.frame * coeffs;
}

namespace {

// Reduced state at time t from precomputed pieces: amp = U^H Psi0 and
// mixer = F^H U, so that the TPS coordinates of Psi(t) are
// mixer * (amp .* exp(-i E t)).
CMat reduced_at(const RVec& energies, const CVec& amp, const CMat& mixer, int m, int n,
                double t) {
    CVec phased(amp.size());
    for (int l = 0; l < amp.size(); ++l) {
        const double phase = -energies(l) * t;
        phased(l) = amp(l) * cx(std::cos(phase), std::sin(phase));
    }
    const CVec w = mixer * phased;
    Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        w.data(), m, n);
    return c * c.adjoint();
}

} // namespace

Trajectory reduced_trajectory(const CVec& psi0, const qla::SpectralDecomposition& spec,
                              const tps::TpsDescriptor& tps, const TimeGrid& grid,
                              int threads) {
    grid.validate();
    if (psi0.size() != spec.dim() || spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "reduced_trajectory: inconsistent dimensions");

    const CVec amp = spec.frame.adjoint() * psi0;
    const CMat mixer = tps.frame.adjoint() * spec.frame;

    Trajectory traj;
    traj.times.resize(grid.samples);
    traj.reduced_states.resize(grid.samples);
    for (int k = 0; k < grid.samples; ++k) traj.times[k] = grid.time_at(k);

    auto work = [&](int begin, int end) {
        for (int k = begin; k < end; ++k)
            traj.reduced_states[k] =
                reduced_at(spec.eigenvalues, amp, mixer, tps.m, tps.n, traj.times[k]);
    };

    const int workers = std::max(1, std::min(threads, grid.samples));
    if (workers == 1) {
        work(0, grid.samples);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (grid.samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int begin = w * chunk;
            const int end = std::min(grid.samples, begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return traj;
}

CMat diagonal_ensemble(const CVec& psi0, const qla::SpectralDecomposition& spec,
                       const tps::TpsDescriptor& tps) {
    if (psi0.size() != spec.dim() || spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "diagonal_ensemble: inconsistent dimensions");

    const CVec amp = spec.frame.adjoint() * psi0;
    const CMat mixer = tps.frame.adjoint() * spec.frame;

    CMat rho = CMat::Zero(tps.m, tps.m);
    for (const auto& [begin, end] : spec.blocks) {
        const CVec w = mixer.middleCols(begin, end - begin) * amp.segment(begin, end - begin);
        Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
            w.data(), tps.m, tps.n);
        rho += c * c.adjoint();
    }
    return rho;
}

CMat numeric_time_average(const CVec& psi0, const qla::SpectralDecomposition& spec,
                          const tps::TpsDescriptor& tps, const TimeGrid& grid) {
    grid.validate();
    if (grid.samples < 2)
        fail(errc::config_invalid, "numeric_time_average: needs at least 2 samples");
    if (psi0.size() != spec.dim() || spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "numeric_time_average: inconsistent dimensions");

    const CVec amp = spec.frame.adjoint() * psi0;
    const CMat mixer = tps.frame.adjoint() * spec.frame;
    CMat acc = CMat::Zero(tps.m, tps.m);
    for (int k = 0; k < grid.samples; ++k)
        acc += reduced_at(spec.eigenvalues, amp, mixer, tps.m, tps.n, grid.time_at(k));
    return acc / static_cast<double>(grid.samples);
}

CMat conditional_system_hamiltonian(const qla::SpectralDecomposition& spec,
                                    const tps::TpsDescriptor& tps, int j) {
    if (spec.dim() != tps.dim())
        fail(errc::dimension_mismatch, "conditional_system_hamiltonian: dim mismatch");
    if (j < 0 || j >= tps.n)
        fail(errc::index_out_of_range, "conditional_system_hamiltonian: bath index outside 0..n-1");

    const double scale = std::max(1.0, spec.spectral_range());
    CMat h = CMat::Zero(tps.m, tps.m);
    for (int i = 0; i < tps.m; ++i) {
        const CVec amp = spec.frame.adjoint() * tps.grid_vector(i, j);
        double energy = 0.0;
        for (int l = 0; l < spec.dim(); ++l) energy += std::norm(amp(l)) * spec.eigenvalues(l);
        double variance = 0.0;
        for (int l = 0; l < spec.dim(); ++l) {
            const double dev = spec.eigenvalues(l) - energy;
            variance += std::norm(amp(l)) * dev * dev;
        }
        if (std::sqrt(variance) > 1e-8 * scale)
            fail(errc::not_eigenbasis_induced,
                 "conditional_system_hamiltonian: frame column (" + std::to_string(i) + "," +
                     std::to_string(j) + ") is not an eigenvector");
        h(i, i) = energy;
    }
    return h;
}

bool horizon_sufficient(const TimeGrid& grid, const qla::SpectralDecomposition& spec) {
    const double gap = qla::min_nonzero_gap(spec);
    if (!std::isfinite(gap)) return true;  // fully degenerate: nothing dephases
    return grid.t_max >= 50.0 / gap;
}

} // namespace tpslab::dynamics
