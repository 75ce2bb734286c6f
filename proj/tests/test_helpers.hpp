#pragma once

#include "tpslab/models.hpp"
#include "tpslab/qla.hpp"
#include "tpslab/rng.hpp"
#include "tpslab/types.hpp"

namespace tpslab::test {

// deterministic unitary: eigenframe of a seeded GUE sample
inline CMat random_unitary(int dim, std::uint64_t seed) {
    const CMat h = models::build_random_gue({dim, seed});
    return qla::eig_hermitian(h).frame;
}

// mixture of a few Haar states, normalized to unit trace
inline CMat random_density(int dim, std::uint64_t seed, int rank = 3) {
    rng::Stream stream(seed, rng::kStreamTests);
    CMat rho = CMat::Zero(dim, dim);
    double total = 0.0;
    for (int r = 0; r < rank; ++r) {
        const CVec v = rng::haar_unit_vector(dim, stream);
        const double w = stream.next_unit();
        rho += w * (v * v.adjoint());
        total += w;
    }
    return rho / total;
}

inline CVec basis_vector(int dim, int index) {
    CVec v = CVec::Zero(dim);
    v(index) = 1.0;
    return v;
}

} // namespace tpslab::test
