#pragma once

#include <cstdint>
#include <vector>

#include "tpslab/qla.hpp"
#include "tpslab/types.hpp"

namespace tpslab::models {

// Open chain of N spins 1/2:
//   H = 1/4 sum_{n=1}^{N-1} (sx_n sx_{n+1} + sy_n sy_{n+1}) + h/2 sum_n sz_n
// Site 1 is the most significant qubit of the basis index; bit 0 means spin up.
struct XxChainSpec {
    int sites = 2;       // 2 <= N <= 12
    double field = 0.0;  // h
};

// H = sz_central * sum_{n=1}^N g_n sz_n, central qubit most significant.
struct CentralSpinSpec {
    int bath_sites = 1;              // 1 <= N <= 11
    std::vector<double> couplings;   // empty -> g_n = 1/n
};

struct RandomSpec {
    int dim = 2;  // 2 <= d <= 4096
    std::uint64_t seed = 0;
};

// Single-particle modes of the XX chain: columns of mode_vectors are the
// orthonormal eigenvectors of the N x N hopping matrix (1/2 on the first
// off-diagonals, h on the diagonal), mode_energies ascending.
struct FermionModeBasis {
    int sites = 0;
    RMat mode_vectors;
    std::vector<double> mode_energies;
};

CMat build_xx_chain(const XxChainSpec& spec);

// Independent route to the XX spectrum: diagonalize the hopping matrix and
// enumerate all occupation patterns, E(occ) = sum_k eps_k (occ_k - 1/2).
// The returned many-body spectrum is sorted ascending.
struct FreeFermionSpectrum {
    FermionModeBasis modes;
    std::vector<double> many_body;
};
FreeFermionSpectrum xx_free_fermion_oracle(const XxChainSpec& spec);

CMat build_central_spin(const CentralSpinSpec& spec);

// Effective couplings after defaulting (g_n = 1/n when unspecified).
std::vector<double> central_spin_couplings(const CentralSpinSpec& spec);

// GUE sample: diagonal real standard normal, off-diagonal (a+ib)/sqrt(2) with
// a, b standard normal, drawn row-major over the upper triangle from the
// counter-based stream (seed, kStreamGue).
CMat build_random_gue(const RandomSpec& spec);

// I (x) ... (x) sigma_axis (x) ... (x) I with the Pauli matrix at `site`
// (1-based, site 1 most significant).
enum class Axis { x, y, z };
CMat pauli_site_operator(int sites, int site, Axis axis);

// 2x2 Pauli matrices.
CMat pauli(Axis axis);

} // namespace tpslab::models
