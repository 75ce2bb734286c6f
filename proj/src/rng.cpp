#include "tpslab/rng.hpp"

#include <cmath>

namespace tpslab::rng {

double Stream::next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

CVec haar_unit_vector(int dim, Stream& stream) {
    if (dim < 1) fail(errc::dimension_mismatch, "haar_unit_vector: dim must be >= 1");
    CVec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = stream.next_cnormal();
    v /= v.norm();
    return v;
}

} // namespace tpslab::rng
