#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "test_helpers.hpp"
#include "tpslab/dynamics.hpp"
#include "tpslab/models.hpp"
#include "tpslab/qla.hpp"
#include "tpslab/rng.hpp"
#include "tpslab/tps.hpp"

using namespace tpslab;
using qla::Keep;

namespace {

// independent single-site partial trace by direct bit contraction
CMat site_reduced_oracle(const CVec& psi, int sites, int site) {
    const int pos = sites - site;
    const std::uint64_t dim = std::uint64_t{1} << sites;
    CMat rho = CMat::Zero(2, 2);
    for (std::uint64_t b = 0; b < dim; ++b) {
        for (int a2 = 0; a2 < 2; ++a2) {
            const int a1 = (b >> pos) & 1u;
            const std::uint64_t b2 =
                (b & ~(std::uint64_t{1} << pos)) | (std::uint64_t(a2) << pos);
            rho(a1, a2) += psi(b) * std::conj(psi(b2));
        }
    }
    return rho;
}

} // namespace

TEST_CASE("tps_from_basis: identity basis gives the computational split") {
    const CMat basis = CMat::Identity(4, 4);
    const auto tps = tps::tps_from_basis(basis, tps::GridAssignment::identity(4), 2, 2);
    CHECK(qla::max_abs(tps.frame - CMat::Identity(4, 4)) == 0.0);
    CHECK(tps.cell(1, 0) == 2);
}

TEST_CASE("tps_from_basis: factorization and unitarity errors") {
    const CMat b6 = test::random_unitary(6, 1);
    CHECK_NOTHROW(tps::tps_from_basis(b6, tps::GridAssignment::identity(6), 2, 3));

    const CMat b7 = test::random_unitary(7, 1);
    try {
        tps::tps_from_basis(b7, tps::GridAssignment::identity(7), 2, 3);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::bad_factorization);
    }

    CMat not_unitary = b6;
    not_unitary(0, 0) += 0.1;
    try {
        tps::tps_from_basis(not_unitary, tps::GridAssignment::identity(6), 2, 3);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::non_unitary_basis);
    }
}

TEST_CASE("tps_from_basis: every grid vector is a product state") {
    const CMat basis = test::random_unitary(6, 8);
    const auto tps = tps::tps_from_basis(basis, tps::GridAssignment::identity(6), 2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto sf = tps::schmidt(tps.grid_vector(i, j), tps);
            CHECK(sf.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
            // the factors are exactly the implied subsystem basis vectors
            CHECK(std::abs(sf.left.col(0)(i)) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(std::abs(sf.right.col(0)(j)) == doctest::Approx(1.0).epsilon(1e-10));
        }
}

TEST_CASE("tps1: grid layout and reduced eigenprojectors") {
    const CMat h = models::build_random_gue({4, 11});
    const auto spec = qla::eig_hermitian(h);
    const auto tps = tps::tps1_from_spectrum(spec, 2, 2);

    // ascending-energy row-major: cell (0,0)=E1, (0,1)=E2, (1,0)=E3, (1,1)=E4
    CHECK(qla::max_abs(tps.grid_vector(0, 0) - spec.frame.col(0)) == 0.0);
    CHECK(qla::max_abs(tps.grid_vector(0, 1) - spec.frame.col(1)) == 0.0);
    CHECK(qla::max_abs(tps.grid_vector(1, 0) - spec.frame.col(2)) == 0.0);
    CHECK(qla::max_abs(tps.grid_vector(1, 1) - spec.frame.col(3)) == 0.0);

    // tr_B |E_{i,j}><E_{i,j}| = |e_i><e_i|
    for (int l = 0; l < 4; ++l) {
        const CMat rho = tps::reduced_pure(spec.frame.col(l), tps, Keep::system);
        CMat want = CMat::Zero(2, 2);
        want(l / 2, l / 2) = 1.0;
        CHECK(qla::max_abs(rho - want) < 1e-12);
    }
}

TEST_CASE("tps1: central spin grid assignment reproduces the physical split") {
    const int bath = 3;
    const CMat h = models::build_central_spin({bath, {}});
    const auto spec = qla::eig_hermitian(h);
    const int dim = 1 << (bath + 1);
    const int n = dim / 2;

    // eigenvectors of the diagonal model are basis kets: route each one to
    // the cell (central bit, bath bits)
    tps::GridAssignment assign;
    assign.cell_of.resize(dim);
    for (int l = 0; l < dim; ++l) {
        int hot = 0;
        for (int k = 0; k < dim; ++k)
            if (std::abs(spec.frame(k, l)) > 0.5) hot = k;
        const int i = hot >> bath;
        const int j = hot & (n - 1);
        assign.cell_of[l] = i * n + j;
    }
    const auto tps1 = tps::tps1_from_spectrum(spec, assign, 2, n);
    const auto site = tps::site_tps(bath + 1, 1);

    rng::Stream stream(5, rng::kStreamTests);
    for (int trial = 0; trial < 4; ++trial) {
        const CVec psi = rng::haar_unit_vector(dim, stream);
        const CMat a = tps::reduced_pure(psi, tps1, Keep::system);
        const CMat b = tps::reduced_pure(psi, site, Keep::system);
        CHECK(qla::max_abs(a - b) < 1e-12);
    }
}

TEST_CASE("tps2: hadamard columns in the second bath half (d=8, m=2, n=4)") {
    const CMat h = models::build_random_gue({8, 13});
    const auto spec = qla::eig_hermitian(h);
    const auto tps2 = tps::tps2_from_spectrum(spec, 2, 4);

    CHECK(qla::unitarity_residual(tps2.frame) < 1e-10);

    // first half coincides with tps1
    const auto tps1 = tps::tps1_from_spectrum(spec, 2, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(qla::max_abs(tps2.grid_vector(i, j) - tps1.grid_vector(i, j)) == 0.0);

    // second half: (E_{0,j} + E_{1,j})/sqrt(2) and (E_{0,j} - E_{1,j})/sqrt(2)
    const double r = 1.0 / std::sqrt(2.0);
    for (int j = 2; j < 4; ++j) {
        const CVec e0 = tps1.grid_vector(0, j);
        const CVec e1 = tps1.grid_vector(1, j);
        CHECK((tps2.grid_vector(0, j) - r * (e0 + e1)).norm() < 1e-12);
        CHECK((tps2.grid_vector(1, j) - r * (e0 - e1)).norm() < 1e-12);
    }
}

TEST_CASE("tps2: eigenstates reduce to dft projectors in the mixed half") {
    const CMat h = models::build_random_gue({12, 17});
    const auto spec = qla::eig_hermitian(h);
    const int m = 3, n = 4;
    const auto tps2 = tps::tps2_from_spectrum(spec, m, n);
    const CMat ftilde = qla::dft_frame(m, -1);

    for (int l = 0; l < 12; ++l) {
        const int i = l / n;
        const int j = l % n;
        const CMat rho = tps::reduced_pure(spec.frame.col(l), tps2, Keep::system);
        CMat want;
        if (j < n / 2) {
            want = CMat::Zero(m, m);
            want(i, i) = 1.0;
        } else {
            want = ftilde.col(i) * ftilde.col(i).adjoint();
        }
        CHECK(qla::max_abs(rho - want) < 1e-12);
    }
}

TEST_CASE("tps2: odd bath dimension rejected") {
    const CMat h = models::build_random_gue({6, 19});
    const auto spec = qla::eig_hermitian(h);
    try {
        tps::tps2_from_spectrum(spec, 2, 3);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::odd_bath_dimension);
    }
}

TEST_CASE("tps2: bath states in the first half reproduce tps1 dynamics") {
    const CMat h = models::build_random_gue({8, 23});
    const auto spec = qla::eig_hermitian(h);
    const auto tps1 = tps::tps1_from_spectrum(spec, 2, 4);
    const auto tps2 = tps::tps2_from_spectrum(spec, 2, 4);

    rng::Stream stream(7, rng::kStreamTests);
    const CVec phi = rng::haar_unit_vector(2, stream);
    CVec chi = CVec::Zero(4);
    const CVec half = rng::haar_unit_vector(2, stream);
    chi(0) = half(0);
    chi(1) = half(1);

    const CVec psi1 = tps::embed_product({phi, chi}, tps1);
    const CVec psi2 = tps::embed_product({phi, chi}, tps2);
    CHECK((psi1 - psi2).norm() < 1e-12);

    for (double t : {0.0, 0.7, 2.3}) {
        const CVec evolved = dynamics::evolve_state(psi1, spec, t);
        const CMat r1 = tps::reduced_pure(evolved, tps1, Keep::system);
        const CMat r2 = tps::reduced_pure(evolved, tps2, Keep::system);
        CHECK(qla::max_abs(r1 - r2) < 1e-12);
    }
}

TEST_CASE("site_tps: frames and single-spin reductions") {
    const auto s1 = tps::site_tps(2, 1);
    CHECK(qla::max_abs(s1.frame - CMat::Identity(4, 4)) == 0.0);

    const auto s2 = tps::site_tps(2, 2);
    CMat swap = CMat::Zero(4, 4);
    swap(0, 0) = 1.0;
    swap(2, 1) = 1.0;
    swap(1, 2) = 1.0;
    swap(3, 3) = 1.0;
    CHECK(qla::max_abs(s2.frame - swap) == 0.0);

    // |up down> reduced at site 2 is |down><down|
    CVec updown = CVec::Zero(4);
    updown(1) = 1.0;
    const CMat rho = tps::reduced_pure(updown, s2, Keep::system);
    CHECK(std::abs(rho(0, 0)) < 1e-15);
    CHECK(std::abs(rho(1, 1) - cx(1.0, 0.0)) < 1e-15);

    CHECK_THROWS_AS(tps::site_tps(3, 4), Error);
}

TEST_CASE("site_tps: agrees with direct bit-contraction partial trace") {
    const int sites = 5;
    rng::Stream stream(9, rng::kStreamTests);
    for (int site = 1; site <= sites; ++site) {
        const auto tps = tps::site_tps(sites, site);
        const CVec psi = rng::haar_unit_vector(1 << sites, stream);
        const CMat via_frame = tps::reduced_pure(psi, tps, Keep::system);
        const CMat direct = site_reduced_oracle(psi, sites, site);
        CHECK(qla::max_abs(via_frame - direct) < 1e-12);
    }
}

TEST_CASE("fermion_mode_tps: fock frame diagonalizes the xx chain") {
    const models::XxChainSpec chain{4, 0.3};
    const CMat h = models::build_xx_chain(chain);
    const auto ff = models::xx_free_fermion_oracle(chain);
    const double hnorm = qla::max_abs(h);

    for (int mode = 1; mode <= 4; ++mode) {
        const auto tps = tps::fermion_mode_tps(ff.modes, mode);
        CHECK(qla::unitarity_residual(tps.frame) < 1e-10);
        for (int c = 0; c < tps.dim(); ++c) {
            const CVec v = tps.frame.col(c);
            const cx energy = v.dot(h * v);
            CHECK((h * v - energy * v).norm() < 1e-9 * hnorm);
        }
    }
}

TEST_CASE("fermion_mode_tps: occupation bookkeeping") {
    const auto ff = models::xx_free_fermion_oracle({3, 0.0});
    const auto tps = tps::fermion_mode_tps(ff.modes, 2);

    // vacuum sits at cell (0, 0) and is the all-down basis ket
    const CVec vac = tps.grid_vector(0, 0);
    CHECK(std::abs(std::abs(vac(7)) - 1.0) < 1e-12);

    // reduced states of fock columns are diag(1,0) or diag(0,1) by occupation
    for (int c = 0; c < tps.dim(); ++c) {
        const int occupied = c / tps.n;
        const CMat rho = tps::reduced_pure(tps.frame.col(c), tps, Keep::system);
        CHECK(std::abs(rho(occupied, occupied) - cx(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(rho(1 - occupied, 1 - occupied)) < 1e-12);
    }

    CHECK_THROWS_AS(tps::fermion_mode_tps(ff.modes, 5), Error);
}

TEST_CASE("fermion_mode_tps: reduced state frozen under xx evolution") {
    const models::XxChainSpec chain{4, 0.5};
    const CMat h = models::build_xx_chain(chain);
    const auto spec = qla::eig_hermitian(h);
    const auto ff = models::xx_free_fermion_oracle(chain);
    const auto tps = tps::fermion_mode_tps(ff.modes, 2);

    rng::Stream stream(31, rng::kStreamTests);

    // occupation eigenstate of the mode times any bath state: frozen exactly
    for (int occ : {0, 1}) {
        const CVec phi = test::basis_vector(2, occ);
        const CVec chi = rng::haar_unit_vector(8, stream);
        const CVec psi0 = tps::embed_product({phi, chi}, tps);
        const CMat rho0 = tps::reduced_pure(psi0, tps, Keep::system);
        for (double t : {0.5, 3.0, 11.0, 47.0}) {
            const CVec psi = dynamics::evolve_state(psi0, spec, t);
            const CMat rho = tps::reduced_pure(psi, tps, Keep::system);
            CHECK(qla::trace_distance(rho, rho0) < 1e-11);
        }
    }

    // entangled branch state with orthogonal bath components: frozen too
    {
        CVec chi_a = CVec::Zero(8), chi_b = CVec::Zero(8);
        chi_a(0) = 1.0;
        chi_b(3) = 1.0;
        const CVec psi0 = 0.6 * tps::embed_product({test::basis_vector(2, 0), chi_a}, tps) +
                          0.8 * tps::embed_product({test::basis_vector(2, 1), chi_b}, tps);
        const CMat rho0 = tps::reduced_pure(psi0, tps, Keep::system);
        CHECK(rho0(0, 0).real() == doctest::Approx(0.36).epsilon(1e-12));
        for (double t : {0.9, 7.7}) {
            const CVec psi = dynamics::evolve_state(psi0, spec, t);
            CHECK(qla::trace_distance(tps::reduced_pure(psi, tps, Keep::system), rho0) < 1e-11);
        }
    }

    // generic states keep the mode occupation and the coherence magnitude;
    // the reduced motion is the single fixed conditional unitary
    {
        const CVec psi0 = rng::haar_unit_vector(16, stream);
        const CMat rho0 = tps::reduced_pure(psi0, tps, Keep::system);
        const CMat hs = dynamics::conditional_system_hamiltonian(spec, tps, 0);
        for (double t : {0.5, 3.0, 11.0}) {
            const CVec psi = dynamics::evolve_state(psi0, spec, t);
            const CMat rho = tps::reduced_pure(psi, tps, Keep::system);
            CHECK(std::abs(rho(0, 0) - rho0(0, 0)) < 1e-12);
            CHECK(std::abs(rho(1, 1) - rho0(1, 1)) < 1e-12);
            CHECK(std::abs(std::abs(rho(0, 1)) - std::abs(rho0(0, 1))) < 1e-12);

            const double w = (hs(1, 1) - hs(0, 0)).real();
            const cx rot = std::exp(cx(0.0, w * t));
            CHECK(std::abs(rho(0, 1) - rot * rho0(0, 1)) < 1e-10);
        }
    }
}

TEST_CASE("embed_product: basics and round trip") {
    const CMat basis = test::random_unitary(6, 3);
    const auto tps = tps::tps_from_basis(basis, tps::GridAssignment::identity(6), 2, 3);

    const CVec phi = test::basis_vector(2, 0);
    const CVec chi = test::basis_vector(3, 1);
    const CVec psi = tps::embed_product({phi, chi}, tps);
    CHECK((psi - tps.grid_vector(0, 1)).norm() < 1e-14);

    rng::Stream stream(12, rng::kStreamTests);
    const CVec rphi = rng::haar_unit_vector(2, stream);
    const CVec rchi = rng::haar_unit_vector(3, stream);
    const CVec rpsi = tps::embed_product({rphi, rchi}, tps);
    CHECK(std::abs(rpsi.norm() - 1.0) < 1e-12);

    const auto sf = tps::schmidt(rpsi, tps);
    CHECK(sf.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));

    const CMat rho = tps::reduced_pure(rpsi, tps, Keep::system);
    CHECK(qla::max_abs(rho - rphi * rphi.adjoint()) < 1e-12);
}

TEST_CASE("eigenstate factorizability: purity one for tps1 and tps2") {
    const CMat h = models::build_random_gue({12, 42});
    const auto spec = qla::eig_hermitian(h);
    for (bool hybrid : {false, true}) {
        const auto tps = hybrid ? tps::tps2_from_spectrum(spec, 3, 4)
                                : tps::tps1_from_spectrum(spec, 3, 4);
        for (int l = 0; l < 12; ++l) {
            const CMat rho = tps::reduced_pure(spec.frame.col(l), tps, Keep::system);
            CHECK(qla::purity(rho) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("tps json round trip") {
    const CMat basis = test::random_unitary(6, 55);
    const auto tps =
        tps::tps_from_basis(basis, tps::GridAssignment::identity(6), 2, 3, "roundtrip");
    const std::string text = tps::to_json(tps);
    const auto back = tps::from_json(text);
    CHECK(back.label == "roundtrip");
    CHECK(back.m == 2);
    CHECK(back.n == 3);
    CHECK(qla::max_abs(back.frame - tps.frame) < 1e-15);

    const std::string path = "tps_roundtrip_test.json";
    tps::save_json(tps, path);
    const auto loaded = tps::load_json(path);
    CHECK(qla::max_abs(loaded.frame - tps.frame) < 1e-15);
    std::remove(path.c_str());

    CHECK_THROWS_AS(tps::from_json("{ not valid"), Error);
}
