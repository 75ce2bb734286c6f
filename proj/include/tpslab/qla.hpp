#pragma once

#include <utility>
#include <vector>

#include "tpslab/types.hpp"

namespace tpslab::qla {

// Which factor survives a partial trace.
enum class Keep { system, bath };

// Eigenvalues (ascending), orthonormal eigenvector frame, and the partition
// of the sorted indices into near-degenerate blocks (adjacent gap < delta_deg
// joins two indices into the same block).
struct SpectralDecomposition {
    RVec eigenvalues;
    CMat frame;                               // column l is the l-th eigenvector
    std::vector<std::pair<int, int>> blocks;  // half-open [begin, end) index ranges
    double delta_deg = 0.0;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    double spectral_range() const {
        return dim() > 0 ? eigenvalues(dim() - 1) - eigenvalues(0) : 0.0;
    }
};

// Bi-orthogonal decomposition of a bipartite pure state. coefficients are the
// reduced-density-matrix eigenvalues (descending, summing to 1); columns of
// left/right are the paired orthonormal factors in system/bath coordinates.
struct SchmidtForm {
    RVec coefficients;
    CMat left;   // m x r
    CMat right;  // n x r
};

double max_abs(const CMat& a);
double unitarity_residual(const CMat& u);                 // ||U^H U - I||_max
bool is_hermitian(const CMat& a, double tol);
void require_hermitian(const CMat& a, double rel_tol, const char* where);

// Cyclic Jacobi diagonalization of a Hermitian matrix. Deterministic: fixed
// row-major pivot order, off-diagonal threshold 1e-13 * max|H|, at most 100
// sweeps, eigenvalues sorted ascending (stable in the pre-sort order), and
// each eigenvector's largest-magnitude component made real positive (lowest
// index wins ties). Throws non_hermitian_input / convergence_failure.
SpectralDecomposition eig_hermitian(const CMat& h, double delta_deg);

// Same, with delta_deg = 1e-9 * spectral range.
SpectralDecomposition eig_hermitian(const CMat& h);

// Eigenvalues only (same Jacobi iteration, no eigenvector accumulation).
RVec hermitian_eigenvalues(const CMat& h);

// Kronecker products. (A (x) B)[ip+k, jq+l] = A[i,j] * B[k,l] for B of shape
// p x q. Throws dimension_overflow past dim_cap.
CMat tensor_product(const CMat& a, const CMat& b, std::size_t dim_cap = kDimCap);
CVec tensor_product(const CVec& a, const CVec& b, std::size_t dim_cap = kDimCap);

// Partial trace of rho over one factor of the bipartition defined by a frame:
// column i*n + j of `frame` is the product basis vector at grid cell (i, j),
// i < m indexing the system and j < n the bath. With c = frame^H rho frame,
// keep == system returns rhoS[i,i'] = sum_j c[(i,j),(i',j)].
CMat partial_trace(const CMat& rho, const CMat& frame, int m, int n, Keep keep);

// Fast path for pure states: reduced density matrix of |psi><psi|.
CMat reduced_pure(const CVec& psi, const CMat& frame, int m, int n, Keep keep);

// Trace distance (1/2) sum |eig(rho - sigma)|, clamped to [0, 1].
double trace_distance(const CMat& rho, const CMat& sigma);

// tr(rho^2).
double purity(const CMat& rho);

SchmidtForm schmidt(const CVec& psi, const CMat& frame, int m, int n);

// Unitary DFT frame, F[i,k] = m^{-1/2} exp(sign * 2*pi*i_unit * k * i / m).
CMat dft_frame(int m, int sign);

// Smallest gap between adjacent degeneracy blocks of a decomposition;
// +infinity when there is a single block.
double min_nonzero_gap(const SpectralDecomposition& spec);

// Invariant checks (Hermitian to 1e-12, unit trace to 1e-12, eigenvalues
// >= -1e-10; unit norm to 1e-12). Throw on violation.
void validate_density(const CMat& rho, const char* where);
void validate_state(const CVec& psi, const char* where);

} // namespace tpslab::qla
