#pragma once

#include <vector>

#include "tpslab/qla.hpp"
#include "tpslab/tps.hpp"
#include "tpslab/types.hpp"

namespace tpslab::dynamics {

// Uniform sampling of [0, t_max): t_k = k * t_max / samples (hbar = 1, time
// in inverse energy units). Left-endpoint spacing keeps equal-weight sample
// averages free of endpoint double counting.
struct TimeGrid {
    double t_max = 1.0;
    int samples = 2;

    void validate() const;
    double time_at(int k) const { return t_max * k / samples; }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<CMat> reduced_states;
};

// Psi(t) = U exp(-i E t) U^H Psi0.
CVec evolve_state(const CVec& psi0, const qla::SpectralDecomposition& spec, double t);

// rhoS(t_k) = tr_B |Psi(t_k)><Psi(t_k)| per grid sample.
Trajectory reduced_trajectory(const CVec& psi0, const qla::SpectralDecomposition& spec,
                              const tps::TpsDescriptor& tps, const TimeGrid& grid,
                              int threads = 1);

// Infinite-time average of the reduced state. Dephasing over the degeneracy
// blocks of the spectrum:
//   rhoS_bar = sum_b tr_B (P_b |Psi0><Psi0| P_b)
// with P_b the block projectors; for a fully non-degenerate spectrum this is
// sum_l |<E_l|Psi0>|^2 tr_B |E_l><E_l|.
CMat diagonal_ensemble(const CVec& psi0, const qla::SpectralDecomposition& spec,
                       const tps::TpsDescriptor& tps);

// Equal-weight average of the reduced trajectory over the grid; independent
// check of diagonal_ensemble. Residual decays like 1/(t_max * gap_min) plus
// an aliasing term when Bohr frequencies approach multiples of the sampling
// rate, so keep t_max >= 50/gap_min and samples well above
// t_max * spectral_range / (2 pi).
CMat numeric_time_average(const CVec& psi0, const qla::SpectralDecomposition& spec,
                          const tps::TpsDescriptor& tps, const TimeGrid& grid);

// Effective system Hamiltonian for a bath frozen in basis column j (0-based):
// diagonal in the system coordinates with entries E_{i,j}, the eigenvalue
// sitting at grid cell (i, j). Requires every frame column of the TPS to be
// an eigenvector of the decomposed Hamiltonian (throws
// not_eigenbasis_induced otherwise).
CMat conditional_system_hamiltonian(const qla::SpectralDecomposition& spec,
                                    const tps::TpsDescriptor& tps, int j);

// Grid horizon check used by scenario validation: t_max should cover at
// least 50 periods of the slowest Bohr frequency.
bool horizon_sufficient(const TimeGrid& grid, const qla::SpectralDecomposition& spec);

} // namespace tpslab::dynamics
