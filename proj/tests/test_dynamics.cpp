#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "tpslab/dynamics.hpp"
#include "tpslab/models.hpp"
#include "tpslab/qla.hpp"
#include "tpslab/rng.hpp"
#include "tpslab/tps.hpp"

using namespace tpslab;
using qla::Keep;

TEST_CASE("evolve_state: identity at t=0, stationary eigenstates, unitarity") {
    const CMat h = models::build_random_gue({8, 5});
    const auto spec = qla::eig_hermitian(h);
    rng::Stream stream(1, rng::kStreamTests);
    const CVec psi0 = rng::haar_unit_vector(8, stream);

    CHECK((dynamics::evolve_state(psi0, spec, 0.0) - psi0).norm() < 1e-13);

    const CVec eigvec = spec.frame.col(3);
    const CVec evolved = dynamics::evolve_state(eigvec, spec, 2.5);
    const cx phase = std::exp(cx(0.0, -spec.eigenvalues(3) * 2.5));
    CHECK((evolved - phase * eigvec).norm() < 1e-12);

    CHECK(std::abs(dynamics::evolve_state(psi0, spec, 17.3).norm() - 1.0) < 1e-12);

    // energy conservation along a trajectory
    const double e0 = psi0.dot(h * psi0).real();
    for (double t : {0.4, 3.1, 9.9}) {
        const CVec psi = dynamics::evolve_state(psi0, spec, t);
        CHECK(std::abs(psi.dot(h * psi).real() - e0) < 1e-10 * qla::max_abs(h));
    }
}

TEST_CASE("reduced_trajectory: grid handling and purity under tps1 bath basis states") {
    const CMat h = models::build_random_gue({12, 8});
    const auto spec = qla::eig_hermitian(h);
    const auto tps1 = tps::tps1_from_spectrum(spec, 3, 4);

    rng::Stream stream(2, rng::kStreamTests);
    const CVec phi = rng::haar_unit_vector(3, stream);
    const CVec psi0 = tps::embed_product({phi, test::basis_vector(4, 1)}, tps1);

    const dynamics::TimeGrid grid{12.0, 48};
    const auto traj = dynamics::reduced_trajectory(psi0, spec, tps1, grid);
    REQUIRE(traj.times.size() == 48);
    CHECK(traj.times[0] == 0.0);
    CHECK(traj.times[1] == doctest::Approx(0.25).epsilon(1e-14));
    for (const CMat& rho : traj.reduced_states)
        CHECK(qla::purity(rho) == doctest::Approx(1.0).epsilon(1e-10));

    // single sample at t = 0 gives the initial reduced state
    const auto once = dynamics::reduced_trajectory(psi0, spec, tps1, {5.0, 1});
    CHECK(qla::max_abs(once.reduced_states[0] - tps::reduced_pure(psi0, tps1, Keep::system)) <
          1e-13);

    // threaded sampling returns identical samples
    const auto par = dynamics::reduced_trajectory(psi0, spec, tps1, grid, 2);
    for (int k = 0; k < 48; ++k)
        CHECK(qla::max_abs(par.reduced_states[k] - traj.reduced_states[k]) == 0.0);
}

TEST_CASE("diagonal_ensemble: stationary eigenstate input") {
    const CMat h = models::build_random_gue({8, 9});
    const auto spec = qla::eig_hermitian(h);
    const auto tps = tps::tps1_from_spectrum(spec, 2, 4);

    const CVec psi0 = spec.frame.col(5);
    const CMat avg = dynamics::diagonal_ensemble(psi0, spec, tps);
    CHECK(qla::max_abs(avg - tps::reduced_pure(psi0, tps, Keep::system)) < 1e-13);
}

TEST_CASE("diagonal_ensemble: tps1 closed form for product states") {
    const CMat h = models::build_random_gue({12, 10});
    const auto spec = qla::eig_hermitian(h);
    const int m = 3, n = 4;
    const auto tps1 = tps::tps1_from_spectrum(spec, m, n);

    rng::Stream stream(3, rng::kStreamTests);
    for (int j = 0; j < n; ++j) {
        const CVec phi = rng::haar_unit_vector(m, stream);
        const CVec psi0 = tps::embed_product({phi, test::basis_vector(n, j)}, tps1);
        const CMat avg = dynamics::diagonal_ensemble(psi0, spec, tps1);

        CMat closed = CMat::Zero(m, m);
        for (int i = 0; i < m; ++i) closed(i, i) = std::norm(phi(i));
        CHECK(qla::max_abs(avg - closed) < 1e-12);
    }
}

TEST_CASE("diagonal_ensemble: invariant under eigenvector phase changes") {
    const CMat h = models::build_random_gue({10, 12});
    const auto spec = qla::eig_hermitian(h);
    const auto tps = tps::tps1_from_spectrum(spec, 2, 5);

    rng::Stream stream(4, rng::kStreamTests);
    const CVec psi0 = rng::haar_unit_vector(10, stream);
    const CMat avg = dynamics::diagonal_ensemble(psi0, spec, tps);

    qla::SpectralDecomposition phased = spec;
    for (int l = 0; l < 10; ++l)
        phased.frame.col(l) *= std::exp(cx(0.0, 2.0 * M_PI * stream.next_unit()));
    const CMat avg2 = dynamics::diagonal_ensemble(psi0, phased, tps);
    CHECK(qla::max_abs(avg - avg2) < 1e-12);
}

TEST_CASE("diagonal_ensemble: degenerate 4x4 block average matches exact period average") {
    // integer spectrum (0, 1, 1, 2) with a random unitary frame: all Bohr
    // frequencies are integers, so a uniform grid over one 2*pi period
    // averages the phases to zero exactly
    const CMat u = test::random_unitary(4, 20);
    RVec vals(4);
    vals << 0.0, 1.0, 1.0, 2.0;
    const CMat h = u * vals.cast<cx>().asDiagonal() * u.adjoint();
    const auto spec = qla::eig_hermitian(h);
    REQUIRE(spec.blocks.size() == 3);

    const auto tps = tps::tps1_from_spectrum(spec, 2, 2);
    rng::Stream stream(6, rng::kStreamTests);
    const CVec psi0 = rng::haar_unit_vector(4, stream);

    const CMat block_avg = dynamics::diagonal_ensemble(psi0, spec, tps);
    const CMat grid_avg =
        dynamics::numeric_time_average(psi0, spec, tps, {2.0 * M_PI, 64});
    CHECK(qla::max_abs(block_avg - grid_avg) < 1e-9);
    qla::validate_density(block_avg, "degenerate average");
}

TEST_CASE("diagonal_ensemble: agrees with long-time numeric average on gue") {
    const CMat h = models::build_random_gue({12, 77});
    const auto spec = qla::eig_hermitian(h);
    const auto tps = tps::tps1_from_spectrum(spec, 3, 4);

    rng::Stream stream(7, rng::kStreamTests);
    const CVec psi0 = rng::haar_unit_vector(12, stream);

    const double gap = qla::min_nonzero_gap(spec);
    const dynamics::TimeGrid grid{200.0 / gap, 4096};
    CHECK(dynamics::horizon_sufficient(grid, spec));

    const CMat diag = dynamics::diagonal_ensemble(psi0, spec, tps);
    const CMat numeric = dynamics::numeric_time_average(psi0, spec, tps, grid);
    CHECK(qla::trace_distance(diag, numeric) <= 0.02);
}

TEST_CASE("conditional_system_hamiltonian: grid energies and trajectory cross-check") {
    const CMat h = models::build_random_gue({4, 30});
    const auto spec = qla::eig_hermitian(h);
    const auto tps1 = tps::tps1_from_spectrum(spec, 2, 2);

    const CMat hs0 = dynamics::conditional_system_hamiltonian(spec, tps1, 0);
    CHECK(hs0(0, 0).real() == doctest::Approx(spec.eigenvalues(0)).epsilon(1e-12));
    CHECK(hs0(1, 1).real() == doctest::Approx(spec.eigenvalues(2)).epsilon(1e-12));
    CHECK(std::abs(hs0(0, 1)) == 0.0);

    const CMat hs1 = dynamics::conditional_system_hamiltonian(spec, tps1, 1);
    CHECK(hs1(0, 0).real() == doctest::Approx(spec.eigenvalues(1)).epsilon(1e-12));
    CHECK(hs1(1, 1).real() == doctest::Approx(spec.eigenvalues(3)).epsilon(1e-12));

    rng::Stream stream(8, rng::kStreamTests);
    const CVec phi = rng::haar_unit_vector(2, stream);
    for (int j = 0; j < 2; ++j) {
        const CMat hs = dynamics::conditional_system_hamiltonian(spec, tps1, j);
        const auto hs_spec = qla::eig_hermitian(hs);
        const CVec psi0 = tps::embed_product({phi, test::basis_vector(2, j)}, tps1);
        for (double t : {0.5, 1.0, 2.0}) {
            const CMat full =
                tps::reduced_pure(dynamics::evolve_state(psi0, spec, t), tps1, Keep::system);
            const CVec phi_t = dynamics::evolve_state(phi, hs_spec, t);
            CHECK(qla::trace_distance(full, phi_t * phi_t.adjoint()) < 1e-9);
        }
    }
}

TEST_CASE("conditional_system_hamiltonian: rejects frames that are not eigenvectors") {
    const models::XxChainSpec chain{3, 0.4};
    const auto spec = qla::eig_hermitian(models::build_xx_chain(chain));
    const auto site = tps::site_tps(3, 1);
    try {
        dynamics::conditional_system_hamiltonian(spec, site, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::not_eigenbasis_induced);
    }
}

TEST_CASE("numeric_time_average: stationary state and validation") {
    const CMat h = models::build_random_gue({6, 40});
    const auto spec = qla::eig_hermitian(h);
    const auto tps = tps::tps1_from_spectrum(spec, 2, 3);

    const CVec psi0 = spec.frame.col(2);
    const CMat avg = dynamics::numeric_time_average(psi0, spec, tps, {10.0, 16});
    CHECK(qla::max_abs(avg - tps::reduced_pure(psi0, tps, Keep::system)) < 1e-12);

    CHECK_THROWS_AS(dynamics::numeric_time_average(psi0, spec, tps, {10.0, 1}), Error);
    CHECK_THROWS_AS(dynamics::numeric_time_average(psi0, spec, tps, {-1.0, 8}), Error);
}

TEST_CASE("numeric_time_average: commuting diagonal case matches block average") {
    // central spin model: H diagonal in the product z basis
    const CMat h = models::build_central_spin({3, {}});
    const auto spec = qla::eig_hermitian(h);
    const auto site = tps::site_tps(4, 1);

    // z-basis product ket: stationary, so the two averages agree exactly
    const CVec ket = test::basis_vector(16, 5);
    const CMat diag_ket = dynamics::diagonal_ensemble(ket, spec, site);
    const CMat num_ket = dynamics::numeric_time_average(ket, spec, site, {64.0, 256});
    CHECK(qla::max_abs(diag_ket - num_ket) < 1e-9);

    // generic product state: agreement limited by the finite horizon only
    rng::Stream stream(9, rng::kStreamTests);
    const CVec phi = rng::haar_unit_vector(2, stream);
    const CVec chi = rng::haar_unit_vector(8, stream);
    const CVec psi0 = tps::embed_product({phi, chi}, site);

    const double gap = qla::min_nonzero_gap(spec);
    const CMat diag = dynamics::diagonal_ensemble(psi0, spec, site);
    const CMat numeric =
        dynamics::numeric_time_average(psi0, spec, site, {600.0 / gap, 4096});
    CHECK(qla::trace_distance(diag, numeric) < 2e-3);
}

TEST_CASE("horizon check") {
    const CMat h = models::build_random_gue({8, 50});
    const auto spec = qla::eig_hermitian(h);
    const double gap = qla::min_nonzero_gap(spec);
    CHECK(dynamics::horizon_sufficient({50.0 / gap + 1.0, 8}, spec));
    CHECK(!dynamics::horizon_sufficient({10.0 / gap, 8}, spec));
}
