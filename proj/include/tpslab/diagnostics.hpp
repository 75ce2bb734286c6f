#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpslab/dynamics.hpp"
#include "tpslab/qla.hpp"
#include "tpslab/tps.hpp"
#include "tpslab/types.hpp"

namespace tpslab::diagnostics {

// Dimensionless Hermitian observables on the system factor plus the variance
// threshold that admits a state into the quasiclassical set.
struct ObservableSet {
    std::vector<CMat> operators;
    double epsilon = 0.0;

    void validate(int m) const;
};

struct QuasiClassicality {
    bool in_set = false;
    double max_variance = 0.0;
};

struct EdhResult {
    double max_variance = 0.0;   // worst Var_{rho_l}(A_alpha) over eigenstates and observables
    double max_mixedness = 0.0;  // worst 1 - purity(rho_l), reported separately
};

struct GibbsFit {
    double beta = 0.0;
    double residual = 0.0;
};

// Time-averaged trace distance of the reduced trajectory from rho_bar; small
// values certify that the reduced state stays near its average most of the
// time.
double equilibration_metric(const dynamics::Trajectory& traj, const CMat& rho_bar);

// Max pairwise trace distance between the infinite-time averages reached
// from Psi0 = phi_a (x) chi0 as phi_a runs over system_states. 0 means the
// equilibrium state forgets the system's initial state; 1 is maximal memory.
double system_isi(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                  const CVec& bath_state, const std::vector<CVec>& system_states);

// Same with the roles swapped: Psi0 = phi0 (x) chi_b over bath_states.
double bath_isi(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                const CVec& system_state, const std::vector<CVec>& bath_states);

// Max pairwise trace distance between reduced eigenstates tr_B |E_l><E_l|
// with E_l inside [window_lo, window_hi]. Near 0: eigenstates in the window
// share one reduced state. Near 1: the reduced state depends strongly on the
// microstate.
double eth_statistic(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                     double window_lo, double window_hi);

// Worst observable variance over all reduced eigenstates, with the mixedness
// penalty reported separately rather than folded in.
EdhResult edh_statistic(const qla::SpectralDecomposition& spec, const tps::TpsDescriptor& tps,
                        const ObservableSet& obs);

// Max deviation | |<a_i|b_k>|^2 - 1/m |; 0 certifies mutually unbiased
// ("maximally distant") bases.
double mutual_unbiasedness(const CMat& basis_a, const CMat& basis_b);

QuasiClassicality quasiclassicality(const CVec& phi, const ObservableSet& obs);

// Best Boltzmann-Gibbs match: beta minimizing D(rho_bar, exp(-beta H)/Z) by
// golden-section search on [-beta_max, beta_max] (default beta_max =
// 50/spectral range of h_eff). Fit-quality diagnostic only.
GibbsFit gibbs_fit(const CMat& rho_bar, const CMat& h_eff, double beta_max = 0.0);

struct ReportEntry {
    std::string name;
    double value = 0.0;
    std::string context;
};

// Named scalar results with run metadata. Serialization preserves insertion
// order so identical runs produce identical bytes.
struct DiagnosticsReport {
    std::string label;
    std::string model;
    std::string tps_label;
    std::uint64_t seed = 0;
    std::string grid;
    std::vector<std::string> warnings;
    std::vector<ReportEntry> entries;

    void add(std::string name, double value, std::string context = "");
    const ReportEntry* find(const std::string& name) const;
    std::string to_json() const;
    std::string to_csv() const;
};

// Round to 15 significant digits; all reported values pass through this so
// emitted files are reproducible at the documented precision.
double quantize15(double v);

} // namespace tpslab::diagnostics
