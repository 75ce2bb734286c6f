#include "tpslab/models.hpp"

#include <algorithm>
#include <cmath>

#include "tpslab/rng.hpp"

namespace tpslab::models {

namespace {

void check_xx_spec(const XxChainSpec& spec) {
    if (spec.sites < 2) fail(errc::config_invalid, "xx_chain: N must be >= 2");
    if (spec.sites > 12) fail(errc::dimension_overflow, "xx_chain: N must be <= 12");
    if (!std::isfinite(spec.field)) fail(errc::config_invalid, "xx_chain: h must be finite");
}

// spin-z eigenvalue (+1 up, -1 down) of site n (1-based) in basis state b
inline int z_of(std::uint64_t b, int sites, int n) {
    return ((b >> (sites - n)) & 1u) ? -1 : 1;
}

} // namespace

CMat pauli(Axis axis) {
    CMat s(2, 2);
    switch (axis) {
        case Axis::x: s << 0, 1, 1, 0; break;
        case Axis::y: s << 0, cx(0, -1), cx(0, 1), 0; break;
        case Axis::z: s << 1, 0, 0, -1; break;
    }
    return s;
}

CMat build_xx_chain(const XxChainSpec& spec) {
    check_xx_spec(spec);
    const int n_sites = spec.sites;
    const std::uint64_t dim = std::uint64_t{1} << n_sites;
    CMat h = CMat::Zero(dim, dim);

    for (std::uint64_t b = 0; b < dim; ++b) {
        double diag = 0.0;
        for (int n = 1; n <= n_sites; ++n) diag += 0.5 * spec.field * z_of(b, n_sites, n);
        h(b, b) = diag;

        // flip-flop: 1/4 (sx sx + sy sy) couples opposite neighbours with 1/2
        for (int n = 1; n < n_sites; ++n) {
            const int p1 = n_sites - n;
            const int p2 = n_sites - n - 1;
            const bool bit1 = (b >> p1) & 1u;
            const bool bit2 = (b >> p2) & 1u;
            if (bit1 != bit2) {
                const std::uint64_t bp = b ^ ((std::uint64_t{1} << p1) | (std::uint64_t{1} << p2));
                h(bp, b) += 0.5;
            }
        }
    }
    return h;
}

FreeFermionSpectrum xx_free_fermion_oracle(const XxChainSpec& spec) {
    check_xx_spec(spec);
    const int n_sites = spec.sites;

    CMat hopping = CMat::Zero(n_sites, n_sites);
    for (int i = 0; i < n_sites; ++i) {
        hopping(i, i) = spec.field;
        if (i + 1 < n_sites) {
            hopping(i, i + 1) = 0.5;
            hopping(i + 1, i) = 0.5;
        }
    }
    const qla::SpectralDecomposition sp = qla::eig_hermitian(hopping);

    FreeFermionSpectrum out;
    out.modes.sites = n_sites;
    out.modes.mode_vectors = sp.frame.real();
    if (sp.frame.imag().cwiseAbs().maxCoeff() > 1e-12)
        fail(errc::convergence_failure, "free_fermion_oracle: hopping eigenvectors not real");
    out.modes.mode_energies.assign(sp.eigenvalues.data(), sp.eigenvalues.data() + n_sites);

    const std::uint64_t patterns = std::uint64_t{1} << n_sites;
    out.many_body.resize(patterns);
    for (std::uint64_t occ = 0; occ < patterns; ++occ) {
        double e = 0.0;
        for (int k = 0; k < n_sites; ++k)
            e += out.modes.mode_energies[k] * (((occ >> k) & 1u) ? 0.5 : -0.5);
        out.many_body[occ] = e;
    }
    std::sort(out.many_body.begin(), out.many_body.end());
    return out;
}

std::vector<double> central_spin_couplings(const CentralSpinSpec& spec) {
    if (!spec.couplings.empty()) {
        if (static_cast<int>(spec.couplings.size()) != spec.bath_sites)
            fail(errc::config_invalid, "central_spin: couplings length must equal N");
        for (double g : spec.couplings)
            if (!std::isfinite(g)) fail(errc::config_invalid, "central_spin: couplings must be finite");
        return spec.couplings;
    }
    std::vector<double> g(spec.bath_sites);
    for (int n = 1; n <= spec.bath_sites; ++n) g[n - 1] = 1.0 / n;
    return g;
}

CMat build_central_spin(const CentralSpinSpec& spec) {
    if (spec.bath_sites < 1) fail(errc::config_invalid, "central_spin: N must be >= 1");
    if (spec.bath_sites > 11) fail(errc::dimension_overflow, "central_spin: N must be <= 11");
    const std::vector<double> g = central_spin_couplings(spec);

    const int total = spec.bath_sites + 1;  // central qubit is site 1 (most significant)
    const std::uint64_t dim = std::uint64_t{1} << total;
    CMat h = CMat::Zero(dim, dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
        double bath = 0.0;
        for (int n = 1; n <= spec.bath_sites; ++n) bath += g[n - 1] * z_of(b, total, n + 1);
        h(b, b) = z_of(b, total, 1) * bath;
    }
    return h;
}

CMat build_random_gue(const RandomSpec& spec) {
    if (spec.dim < 2) fail(errc::config_invalid, "gue: d must be >= 2");
    if (spec.dim > 4096) fail(errc::dimension_overflow, "gue: d must be <= 4096");

    rng::Stream stream(spec.seed, rng::kStreamGue);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CMat h(spec.dim, spec.dim);
    for (int i = 0; i < spec.dim; ++i) {
        h(i, i) = stream.next_normal();
        for (int j = i + 1; j < spec.dim; ++j) {
            const double a = stream.next_normal();
            const double b = stream.next_normal();
            h(i, j) = cx(a, b) * inv_sqrt2;
            h(j, i) = std::conj(h(i, j));
        }
    }
    return h;
}

CMat pauli_site_operator(int sites, int site, Axis axis) {
    if (sites < 1 || sites > 14) fail(errc::dimension_overflow, "pauli_site_operator: bad N");
    if (site < 1 || site > sites)
        fail(errc::index_out_of_range,
             "pauli_site_operator: site " + std::to_string(site) + " outside 1.." +
                 std::to_string(sites));
    const CMat s = pauli(axis);
    const std::uint64_t dim = std::uint64_t{1} << sites;
    const int pos = sites - site;  // bit position of the chosen site
    CMat out = CMat::Zero(dim, dim);
    for (std::uint64_t b = 0; b < dim; ++b) {
        const int bit = (b >> pos) & 1u;
        for (int to = 0; to < 2; ++to) {
            const cx amp = s(to, bit);
            if (amp != cx(0, 0)) {
                const std::uint64_t bp =
                    (b & ~(std::uint64_t{1} << pos)) | (std::uint64_t(to) << pos);
                out(bp, b) += amp;
            }
        }
    }
    return out;
}

} // namespace tpslab::models
