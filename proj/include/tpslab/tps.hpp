#pragma once

#include <string>
#include <vector>

#include "tpslab/models.hpp"
#include "tpslab/qla.hpp"
#include "tpslab/types.hpp"

namespace tpslab::tps {

// Bipartition of a d = m*n dimensional space, stored as an orthonormal frame:
// column i*n + j of `frame` is the product basis vector at grid cell (i, j),
// with i < m indexing the system factor and j < n the bath factor.
struct TpsDescriptor {
    int m = 0;
    int n = 0;
    CMat frame;
    std::string label;

    int dim() const { return m * n; }
    int cell(int i, int j) const { return i * n + j; }
    CVec grid_vector(int i, int j) const { return frame.col(cell(i, j)); }
};

// Bijection from basis-vector index l to grid cell (both 0-based, cells in
// row-major order). Identity maps l -> cell l.
struct GridAssignment {
    std::vector<int> cell_of;

    static GridAssignment identity(int dim);
    void validate(int dim) const;
};

struct ProductState {
    CVec system;  // dim m
    CVec bath;    // dim n
};

// Reorder the columns of an orthonormal basis onto the grid. Every basis
// vector becomes a product state of the resulting bipartition.
TpsDescriptor tps_from_basis(const CMat& basis, const GridAssignment& assign, int m, int n,
                             std::string label = "tps");

// Grid built from a Hamiltonian eigenframe; with the identity assignment,
// cell (i, j) holds the eigenvector of rank i*n + j in ascending energy.
TpsDescriptor tps1_from_spectrum(const qla::SpectralDecomposition& spec,
                                 const GridAssignment& assign, int m, int n);
TpsDescriptor tps1_from_spectrum(const qla::SpectralDecomposition& spec, int m, int n);

// Hybrid grid (n even): bath columns j < n/2 hold raw eigenvectors, columns
// j >= n/2 hold DFT superpositions over the row index,
//   Psi_{i,j} = m^{-1/2} sum_k exp(+2 pi i_unit k i / m) E_{k,j}.
// Eigenstates then reduce to |e_i><e_i| for j < n/2 and to the sign=-1 DFT
// basis projectors for j >= n/2.
TpsDescriptor tps2_from_spectrum(const qla::SpectralDecomposition& spec,
                                 const GridAssignment& assign, int m, int n);
TpsDescriptor tps2_from_spectrum(const qla::SpectralDecomposition& spec, int m, int n);

// Single spin `site` (1-based) of an N-qubit register as the system, the
// remaining qubits (original order) as the bath. m = 2, n = 2^{N-1}.
TpsDescriptor site_tps(int sites, int site);

// Jordan-Wigner Fock basis of the XX chain arranged with the occupation of
// `mode` (1-based) as the system index. Fock states are built by applying
// mode creation operators in ascending mode order to the all-down vacuum,
// with the string over lower-indexed sites.
TpsDescriptor fermion_mode_tps(const models::FermionModeBasis& basis, int mode);

// Closed-system vector of a product state: Psi = sum_{ij} phi_i chi_j Psi_{i,j}.
CVec embed_product(const ProductState& ps, const TpsDescriptor& tps);

// Convenience wrappers over the qla kernels.
CMat partial_trace(const CMat& rho, const TpsDescriptor& tps, qla::Keep keep);
CMat reduced_pure(const CVec& psi, const TpsDescriptor& tps, qla::Keep keep);
qla::SchmidtForm schmidt(const CVec& psi, const TpsDescriptor& tps);

// JSON persistence: {label, m, n, frame as row-major [re, im] pairs}.
std::string to_json(const TpsDescriptor& tps);
TpsDescriptor from_json(const std::string& text);
void save_json(const TpsDescriptor& tps, const std::string& path);
TpsDescriptor load_json(const std::string& path);

} // namespace tpslab::tps
