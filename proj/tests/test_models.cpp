#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_helpers.hpp"
#include "tpslab/models.hpp"
#include "tpslab/qla.hpp"

using namespace tpslab;
using models::Axis;

namespace {

RVec sorted_spectrum(const CMat& h) { return qla::hermitian_eigenvalues(h); }

} // namespace

TEST_CASE("xx chain: two-site spectra from the 4x4 flip-flop block") {
    // h = 0: {-1/2, 0, 0, 1/2}
    RVec s0 = sorted_spectrum(models::build_xx_chain({2, 0.0}));
    CHECK(s0(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(s0(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s0(2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s0(3) == doctest::Approx(0.5).epsilon(1e-12));

    // h = 1: {-1, -1/2, 1/2, 1}
    RVec s1 = sorted_spectrum(models::build_xx_chain({2, 1.0}));
    CHECK(s1(0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s1(1) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(s1(2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s1(3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("xx chain: hermitian, traceless, conserves magnetization") {
    for (double h : {0.0, 0.3, 1.0}) {
        const CMat ham = models::build_xx_chain({5, h});
        CHECK(qla::is_hermitian(ham, 1e-14));
        CHECK(std::abs(ham.trace()) < 1e-12);

        CMat mag = CMat::Zero(32, 32);
        for (int n = 1; n <= 5; ++n) mag += models::pauli_site_operator(5, n, Axis::z);
        CHECK(qla::max_abs(ham * mag - mag * ham) < 1e-10);
    }
}

TEST_CASE("xx chain: matches explicit pauli-operator construction") {
    const int n_sites = 3;
    const double h = 0.7;
    CMat ref = CMat::Zero(8, 8);
    for (int n = 1; n < n_sites; ++n) {
        ref += 0.25 * models::pauli_site_operator(n_sites, n, Axis::x) *
               models::pauli_site_operator(n_sites, n + 1, Axis::x);
        ref += 0.25 * models::pauli_site_operator(n_sites, n, Axis::y) *
               models::pauli_site_operator(n_sites, n + 1, Axis::y);
    }
    for (int n = 1; n <= n_sites; ++n)
        ref += 0.5 * h * models::pauli_site_operator(n_sites, n, Axis::z);
    CHECK(qla::max_abs(models::build_xx_chain({n_sites, h}) - ref) < 1e-14);
}

TEST_CASE("free fermion oracle: mode energies") {
    const auto ff2 = models::xx_free_fermion_oracle({2, 0.0});
    CHECK(ff2.modes.mode_energies[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ff2.modes.mode_energies[1] == doctest::Approx(0.5).epsilon(1e-12));
    RVec mb(4);
    for (int i = 0; i < 4; ++i) mb(i) = ff2.many_body[i];
    CHECK(mb(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(mb(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mb(2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mb(3) == doctest::Approx(0.5).epsilon(1e-12));

    // open-chain sine modes: eps_k = h + cos(k pi / (N+1))
    const auto ff3 = models::xx_free_fermion_oracle({3, 0.0});
    CHECK(ff3.modes.mode_energies[0] == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-12));
    CHECK(std::abs(ff3.modes.mode_energies[1]) < 1e-11);
    CHECK(ff3.modes.mode_energies[2] == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));

    // mode vectors orthogonal
    const RMat v = ff3.modes.mode_vectors;
    CHECK((v.transpose() * v - RMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("free fermion oracle: many-body spectrum equals dense spectrum") {
    for (int n : {2, 3, 4, 5, 6}) {
        for (double h : {0.0, 0.3, 1.0}) {
            const RVec dense = sorted_spectrum(models::build_xx_chain({n, h}));
            const auto ff = models::xx_free_fermion_oracle({n, h});
            REQUIRE(static_cast<int>(ff.many_body.size()) == dense.size());
            for (int l = 0; l < dense.size(); ++l)
                CHECK(std::abs(dense(l) - ff.many_body[l]) < 1e-9);

            double sum = 0.0;
            for (double e : ff.many_body) sum += e;
            CHECK(std::abs(sum) < 1e-10);
        }
    }
}

TEST_CASE("central spin: frozen small cases") {
    const CMat h1 = models::build_central_spin({1, {1.0}});
    CMat expected = CMat::Zero(4, 4);
    expected(0, 0) = 1.0;
    expected(1, 1) = -1.0;
    expected(2, 2) = -1.0;
    expected(3, 3) = 1.0;
    CHECK(qla::max_abs(h1 - expected) == 0.0);

    // N=2, g = (1, 1/2): each of +-3/2, +-1/2 appears twice
    const RVec s = sorted_spectrum(models::build_central_spin({2, {1.0, 0.5}}));
    const double want[8] = {-1.5, -1.5, -0.5, -0.5, 0.5, 0.5, 1.5, 1.5};
    for (int i = 0; i < 8; ++i) CHECK(s(i) == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("central spin: diagonal, symmetric spectrum, double degeneracy") {
    const CMat h = models::build_central_spin({4, {}});  // g_n = 1/n
    const int dim = 32;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            if (i != j) CHECK(h(i, j) == cx(0.0, 0.0));

    const RVec s = sorted_spectrum(h);
    for (int i = 0; i < dim; ++i)
        CHECK(s(i) == doctest::Approx(-s(dim - 1 - i)).epsilon(1e-12));
    // global spin flip pairs every level
    std::vector<double> vals(s.data(), s.data() + dim);
    for (int i = 0; i < dim; i += 2)
        CHECK(vals[i] == doctest::Approx(vals[i + 1]).epsilon(1e-12));
}

TEST_CASE("gue builder: deterministic, hermitian, correct scale") {
    const CMat a = models::build_random_gue({64, 123});
    const CMat b = models::build_random_gue({64, 123});
    CHECK(qla::max_abs(a - b) == 0.0);
    CHECK(qla::max_abs(a - a.adjoint()) == 0.0);

    const CMat c = models::build_random_gue({64, 124});
    CHECK(qla::max_abs(a - c) > 1e-3);

    // empirical mean of |H_ij|^2 off-diagonal ~ 1 within 10% at d = 256
    const CMat big = models::build_random_gue({256, 7});
    double acc = 0.0;
    long count = 0;
    for (int i = 0; i < 256; ++i)
        for (int j = i + 1; j < 256; ++j) {
            acc += std::norm(big(i, j));
            ++count;
        }
    CHECK(acc / count == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("gue builder: d=64 spectrum has no exact degeneracy") {
    const CMat h = models::build_random_gue({64, 2024});
    const RVec vals = qla::hermitian_eigenvalues(h);
    double min_gap = 1e300;
    for (int l = 1; l < vals.size(); ++l) min_gap = std::min(min_gap, vals(l) - vals(l - 1));
    CHECK(min_gap > 0.0);
}

TEST_CASE("pauli_site_operator: placement and involution") {
    const CMat z1 = models::pauli_site_operator(1, 1, Axis::z);
    CHECK(z1(0, 0) == cx(1.0, 0.0));
    CHECK(z1(1, 1) == cx(-1.0, 0.0));

    const CMat z2 = models::pauli_site_operator(2, 2, Axis::z);
    CHECK(z2(0, 0) == cx(1.0, 0.0));
    CHECK(z2(1, 1) == cx(-1.0, 0.0));
    CHECK(z2(2, 2) == cx(1.0, 0.0));
    CHECK(z2(3, 3) == cx(-1.0, 0.0));

    const CMat x1 = models::pauli_site_operator(2, 1, Axis::x);
    CHECK(qla::max_abs(x1 * x1 - CMat::Identity(4, 4)) == 0.0);

    CHECK_THROWS_AS(models::pauli_site_operator(2, 3, Axis::x), Error);
    try {
        models::pauli_site_operator(2, 0, Axis::x);
    } catch (const Error& e) {
        CHECK(e.code() == errc::index_out_of_range);
    }
}

TEST_CASE("pauli_site_operator: kron consistency") {
    const CMat direct = models::pauli_site_operator(3, 2, Axis::y);
    const CMat i2 = CMat::Identity(2, 2);
    const CMat ref =
        qla::tensor_product(qla::tensor_product(i2, models::pauli(Axis::y)), i2);
    CHECK(qla::max_abs(direct - ref) == 0.0);
}

TEST_CASE("spec validation errors") {
    CHECK_THROWS_AS(models::build_xx_chain({1, 0.0}), Error);
    CHECK_THROWS_AS(models::build_xx_chain({13, 0.0}), Error);
    CHECK_THROWS_AS(models::build_central_spin({0, {}}), Error);
    CHECK_THROWS_AS(models::build_central_spin({2, {1.0}}), Error);  // wrong g length
    CHECK_THROWS_AS(models::build_random_gue({1, 0}), Error);
}
