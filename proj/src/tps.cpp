#include "tpslab/tps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tpslab::tps {

GridAssignment GridAssignment::identity(int dim) {
    GridAssignment a;
    a.cell_of.resize(dim);
    for (int l = 0; l < dim; ++l) a.cell_of[l] = l;
    return a;
}

void GridAssignment::validate(int dim) const {
    if (static_cast<int>(cell_of.size()) != dim)
        fail(errc::config_invalid, "grid assignment: length != dimension");
    std::vector<char> seen(dim, 0);
    for (int c : cell_of) {
        if (c < 0 || c >= dim || seen[c])
            fail(errc::config_invalid, "grid assignment: not a bijection onto 0..d-1");
        seen[c] = 1;
    }
}

namespace {

void check_factorization(Eigen::Index dim, int m, int n, const char* where) {
    if (m < 2 || n < 2 || static_cast<Eigen::Index>(m) * n != dim)
        fail(errc::bad_factorization,
             std::string(where) + ": cannot split dimension " + std::to_string(dim) + " as " +
                 std::to_string(m) + " x " + std::to_string(n));
}

} // namespace

TpsDescriptor tps_from_basis(const CMat& basis, const GridAssignment& assign, int m, int n,
                             std::string label) {
    if (basis.rows() != basis.cols())
        fail(errc::non_unitary_basis, "tps_from_basis: basis must be square");
    check_factorization(basis.rows(), m, n, "tps_from_basis");
    if (qla::unitarity_residual(basis) > 1e-10)
        fail(errc::non_unitary_basis, "tps_from_basis: basis is not unitary (tol 1e-10)");
    assign.validate(static_cast<int>(basis.rows()));

    TpsDescriptor tps;
    tps.m = m;
    tps.n = n;
    tps.label = std::move(label);
    tps.frame.resize(basis.rows(), basis.cols());
    for (int l = 0; l < basis.cols(); ++l) tps.frame.col(assign.cell_of[l]) = basis.col(l);
    return tps;
}

TpsDescriptor tps1_from_spectrum(const qla::SpectralDecomposition& spec,
                                 const GridAssignment& assign, int m, int n) {
    TpsDescriptor tps = tps_from_basis(spec.frame, assign, m, n, "tps1");
    return tps;
}

TpsDescriptor tps1_from_spectrum(const qla::SpectralDecomposition& spec, int m, int n) {
    return tps1_from_spectrum(spec, GridAssignment::identity(spec.dim()), m, n);
}

TpsDescriptor tps2_from_spectrum(const qla::SpectralDecomposition& spec,
                                 const GridAssignment& assign, int m, int n) {
    if (n % 2 != 0)
        fail(errc::odd_bath_dimension, "tps2: bath dimension must be even, got " +
                                           std::to_string(n));
    TpsDescriptor tps = tps1_from_spectrum(spec, assign, m, n);
    tps.label = "tps2";

    const CMat dft = qla::dft_frame(m, +1);
    for (int j = n / 2; j < n; ++j) {
        CMat block(tps.dim(), m);
        for (int k = 0; k < m; ++k) block.col(k) = tps.frame.col(tps.cell(k, j));
        const CMat mixed = block * dft;  // column i = m^{-1/2} sum_k e^{+2pi i k i/m} E_{k,j}
        for (int i = 0; i < m; ++i) tps.frame.col(tps.cell(i, j)) = mixed.col(i);
    }
    return tps;
}

TpsDescriptor tps2_from_spectrum(const qla::SpectralDecomposition& spec, int m, int n) {
    return tps2_from_spectrum(spec, GridAssignment::identity(spec.dim()), m, n);
}

TpsDescriptor site_tps(int sites, int site) {
    if (sites < 2 || sites > 14) fail(errc::dimension_overflow, "site_tps: bad N");
    if (site < 1 || site > sites)
        fail(errc::index_out_of_range, "site_tps: site outside 1..N");

    const std::uint64_t dim = std::uint64_t{1} << sites;
    const int pos = sites - site;  // bit position of the chosen qubit
    TpsDescriptor tps;
    tps.m = 2;
    tps.n = static_cast<int>(dim / 2);
    tps.label = "site" + std::to_string(site);
    tps.frame = CMat::Zero(dim, dim);

    // cell (i, j): qubit `site` in state i, remaining qubits encode j in
    // their original order
    for (std::uint64_t b = 0; b < dim; ++b) {
        const std::uint64_t i = (b >> pos) & 1u;
        const std::uint64_t high = b >> (pos + 1);
        const std::uint64_t low = b & ((std::uint64_t{1} << pos) - 1);
        const std::uint64_t j = (high << pos) | low;
        tps.frame(b, i * tps.n + j) = 1.0;
    }
    return tps;
}

namespace {

// psi <- c_n^dagger psi with c_n^dagger = (prod_{k<n} sz_k) s+_n on the
// convention that spin down is the empty site (bit 1 = down).
CVec apply_site_creation(const CVec& psi, int sites, int n) {
    const std::uint64_t dim = std::uint64_t{1} << sites;
    const int pos = sites - n;
    CVec out = CVec::Zero(dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
        if (psi(b) == cx(0, 0)) continue;
        if (((b >> pos) & 1u) == 0) continue;  // already occupied
        // parity of down spins on sites 1..n-1 (bit positions above pos)
        const std::uint64_t mask = ((dim - 1) >> (pos + 1)) << (pos + 1);
        const int parity = __builtin_popcountll(b & mask) & 1;
        const std::uint64_t bp = b & ~(std::uint64_t{1} << pos);
        out(bp) += (parity ? -1.0 : 1.0) * psi(b);
    }
    return out;
}

} // namespace

TpsDescriptor fermion_mode_tps(const models::FermionModeBasis& basis, int mode) {
    const int sites = basis.sites;
    if (sites < 2 || sites > 12) fail(errc::dimension_overflow, "fermion_mode_tps: bad N");
    if (mode < 1 || mode > sites)
        fail(errc::index_out_of_range, "fermion_mode_tps: mode outside 1..N");

    const std::uint64_t dim = std::uint64_t{1} << sites;
    TpsDescriptor tps;
    tps.m = 2;
    tps.n = static_cast<int>(dim / 2);
    tps.label = "mode" + std::to_string(mode);
    tps.frame.resize(dim, dim);

    CVec vacuum = CVec::Zero(dim);
    vacuum(dim - 1) = 1.0;  // all spins down

    // remaining modes in ascending order carry the bath index, first one most
    // significant
    std::vector<int> others;
    for (int k = 1; k <= sites; ++k)
        if (k != mode) others.push_back(k);

    for (std::uint64_t occ = 0; occ < dim; ++occ) {
        // decode grid cell -> per-mode occupations
        const int i = static_cast<int>(occ / tps.n);
        const std::uint64_t j = occ % tps.n;
        std::vector<char> occupied(sites + 1, 0);
        occupied[mode] = static_cast<char>(i);
        for (std::size_t r = 0; r < others.size(); ++r)
            occupied[others[r]] = (j >> (others.size() - 1 - r)) & 1u;

        CVec state = vacuum;
        for (int k = 1; k <= sites; ++k) {
            if (!occupied[k]) continue;
            CVec next = CVec::Zero(dim);
            for (int site_n = 1; site_n <= sites; ++site_n) {
                const double w = basis.mode_vectors(site_n - 1, k - 1);
                if (w != 0.0) next += w * apply_site_creation(state, sites, site_n);
            }
            state = std::move(next);
        }
        tps.frame.col(occ) = state;
    }
    return tps;
}

CVec embed_product(const ProductState& ps, const TpsDescriptor& tps) {
    if (ps.system.size() != tps.m || ps.bath.size() != tps.n)
        fail(errc::dimension_mismatch, "embed_product: factor dimensions do not match TPS");
    qla::validate_state(ps.system, "embed_product(system)");
    qla::validate_state(ps.bath, "embed_product(bath)");
    CVec coords(tps.dim());
    for (int i = 0; i < tps.m; ++i)
        for (int j = 0; j < tps.n; ++j) coords(tps.cell(i, j)) = ps.system(i) * ps.bath(j);
    return tps.frame * coords;
}

CMat partial_trace(const CMat& rho, const TpsDescriptor& tps, qla::Keep keep) {
    return qla::partial_trace(rho, tps.frame, tps.m, tps.n, keep);
}

CMat reduced_pure(const CVec& psi, const TpsDescriptor& tps, qla::Keep keep) {
    return qla::reduced_pure(psi, tps.frame, tps.m, tps.n, keep);
}

qla::SchmidtForm schmidt(const CVec& psi, const TpsDescriptor& tps) {
    return qla::schmidt(psi, tps.frame, tps.m, tps.n);
}

std::string to_json(const TpsDescriptor& tps) {
    nlohmann::ordered_json j;
    j["label"] = tps.label;
    j["m"] = tps.m;
    j["n"] = tps.n;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < tps.frame.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int c = 0; c < tps.frame.cols(); ++c) {
            row.push_back(nlohmann::ordered_json::array(
                {tps.frame(r, c).real(), tps.frame(r, c).imag()}));
        }
        rows.push_back(std::move(row));
    }
    j["frame"] = std::move(rows);
    return j.dump(2);
}

TpsDescriptor from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::io_error, std::string("tps json parse failure: ") + e.what());
    }
    TpsDescriptor tps;
    try {
        tps.label = j.at("label").get<std::string>();
        tps.m = j.at("m").get<int>();
        tps.n = j.at("n").get<int>();
        const auto& rows = j.at("frame");
        const int dim = static_cast<int>(rows.size());
        tps.frame.resize(dim, dim);
        for (int r = 0; r < dim; ++r) {
            const auto& row = rows.at(r);
            if (static_cast<int>(row.size()) != dim)
                fail(errc::io_error, "tps json: frame is not square");
            for (int c = 0; c < dim; ++c)
                tps.frame(r, c) = cx(row.at(c).at(0).get<double>(), row.at(c).at(1).get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        fail(errc::io_error, std::string("tps json: ") + e.what());
    }
    check_factorization(tps.frame.rows(), tps.m, tps.n, "tps from_json");
    if (qla::unitarity_residual(tps.frame) > 1e-10)
        fail(errc::non_unitary_basis, "tps from_json: frame is not unitary");
    return tps;
}

void save_json(const TpsDescriptor& tps, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(errc::io_error, "cannot open " + path + " for writing");
    out << to_json(tps) << '\n';
}

TpsDescriptor load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace tpslab::tps
