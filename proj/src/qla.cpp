#include "tpslab/qla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tpslab {

const char* errc_name(errc code) {
    switch (code) {
        case errc::non_hermitian_input: return "NonHermitianInput";
        case errc::convergence_failure: return "ConvergenceFailure";
        case errc::dimension_overflow: return "DimensionOverflow";
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::index_out_of_range: return "IndexOutOfRange";
        case errc::non_unitary_basis: return "NonUnitaryBasis";
        case errc::bad_factorization: return "BadFactorization";
        case errc::odd_bath_dimension: return "OddBathDimension";
        case errc::not_eigenbasis_induced: return "NotEigenbasisInduced";
        case errc::empty_trajectory: return "EmptyTrajectory";
        case errc::empty_window: return "EmptyWindow";
        case errc::insufficient_horizon: return "InsufficientHorizon";
        case errc::config_invalid: return "ConfigInvalid";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace tpslab

namespace tpslab::qla {

double max_abs(const CMat& a) {
    return a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
}

double unitarity_residual(const CMat& u) {
    const CMat g = u.adjoint() * u - CMat::Identity(u.cols(), u.cols());
    return max_abs(g);
}

bool is_hermitian(const CMat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint()) <= tol;
}

void require_hermitian(const CMat& a, double rel_tol, const char* where) {
    if (a.rows() != a.cols())
        fail(errc::non_hermitian_input, std::string(where) + ": matrix is not square");
    const double scale = std::max(1.0, max_abs(a));
    if (!is_hermitian(a, rel_tol * scale))
        fail(errc::non_hermitian_input, std::string(where) + ": matrix is not Hermitian");
}

namespace {

struct JacobiResult {
    RVec eigenvalues;
    CMat frame;
};

// Cyclic Jacobi with a skip threshold. One rotation zeroes A(p,q) exactly:
// a phase transfer K = diag(u, 1) with u = A(p,q)/|A(p,q)| makes the 2x2
// block real symmetric, then the classic symmetric Schur rotation applies.
JacobiResult jacobi_hermitian(const CMat& h, bool want_vectors) {
    const int d = static_cast<int>(h.rows());
    CMat a = 0.5 * (h + h.adjoint());  // scrub roundoff-level asymmetry
    CMat v = want_vectors ? CMat::Identity(d, d) : CMat();

    const double scale = max_abs(h);
    const double thresh = 1e-13 * scale;
    bool converged = (scale == 0.0) || (d < 2);

    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d - 1; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const cx apq = a(p, q);
                const double r = std::abs(apq);
                off = std::max(off, r);
                if (r <= thresh) continue;

                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const cx u = apq / r;
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cx uc = u * c;
                const cx us = u * s;

                // columns: A <- A G with G(p,p)=uc, G(q,p)=-s, G(p,q)=us, G(q,q)=c
                const CVec ap = a.col(p);
                const CVec aq = a.col(q);
                a.col(p) = uc * ap - s * aq;
                a.col(q) = us * ap + c * aq;
                // rows: A <- G^H A
                const CVec rp = a.row(p).transpose();
                const CVec rq = a.row(q).transpose();
                a.row(p) = (std::conj(uc) * rp - s * rq).transpose();
                a.row(q) = (std::conj(us) * rp + c * rq).transpose();

                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();

                if (want_vectors) {
                    const CVec vp = v.col(p);
                    const CVec vq = v.col(q);
                    v.col(p) = uc * vp - s * vq;
                    v.col(q) = us * vp + c * vq;
                }
            }
        }
        if (off <= thresh) converged = true;
    }

    if (!converged)
        fail(errc::convergence_failure, "eig_hermitian: 100 Jacobi sweeps exhausted");

    JacobiResult out;
    out.eigenvalues = a.diagonal().real();
    out.frame = std::move(v);
    return out;
}

void sort_and_fix_phases(JacobiResult& jr, bool have_vectors) {
    const int d = static_cast<int>(jr.eigenvalues.size());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return jr.eigenvalues(i) < jr.eigenvalues(j);
    });

    RVec vals(d);
    for (int l = 0; l < d; ++l) vals(l) = jr.eigenvalues(order[l]);

    if (have_vectors) {
        CMat frame(d, d);
        for (int l = 0; l < d; ++l) frame.col(l) = jr.frame.col(order[l]);
        // make the largest-magnitude component of each column real positive
        for (int l = 0; l < d; ++l) {
            int best = 0;
            double best_mag = -1.0;
            for (int k = 0; k < d; ++k) {
                const double mag = std::norm(frame(k, l));
                if (mag > best_mag) {
                    best_mag = mag;
                    best = k;
                }
            }
            const cx pivot = frame(best, l);
            const double mag = std::abs(pivot);
            if (mag > 0.0) frame.col(l) *= std::conj(pivot) / mag;
        }
        jr.frame = std::move(frame);
    }
    jr.eigenvalues = std::move(vals);
}

std::vector<std::pair<int, int>> degeneracy_blocks(const RVec& vals, double delta_deg) {
    std::vector<std::pair<int, int>> blocks;
    const int d = static_cast<int>(vals.size());
    int begin = 0;
    for (int l = 1; l <= d; ++l) {
        if (l == d || vals(l) - vals(l - 1) >= delta_deg) {
            blocks.emplace_back(begin, l);
            begin = l;
        }
    }
    return blocks;
}

} // namespace

SpectralDecomposition eig_hermitian(const CMat& h, double delta_deg) {
    if (h.rows() != h.cols() || h.rows() < 1)
        fail(errc::dimension_mismatch, "eig_hermitian: matrix must be square, dim >= 1");
    if (!(delta_deg > 0.0))
        fail(errc::config_invalid, "eig_hermitian: delta_deg must be > 0");
    require_hermitian(h, 1e-10, "eig_hermitian");

    JacobiResult jr = jacobi_hermitian(h, true);
    sort_and_fix_phases(jr, true);

    SpectralDecomposition spec;
    spec.eigenvalues = std::move(jr.eigenvalues);
    spec.frame = std::move(jr.frame);
    spec.delta_deg = delta_deg;
    spec.blocks = degeneracy_blocks(spec.eigenvalues, delta_deg);
    return spec;
}

SpectralDecomposition eig_hermitian(const CMat& h) {
    if (h.rows() != h.cols() || h.rows() < 1)
        fail(errc::dimension_mismatch, "eig_hermitian: matrix must be square, dim >= 1");
    require_hermitian(h, 1e-10, "eig_hermitian");

    JacobiResult jr = jacobi_hermitian(h, true);
    sort_and_fix_phases(jr, true);

    const int d = static_cast<int>(jr.eigenvalues.size());
    const double range = jr.eigenvalues(d - 1) - jr.eigenvalues(0);
    const double delta = range > 0.0 ? 1e-9 * range : 1e-12;

    SpectralDecomposition spec;
    spec.eigenvalues = std::move(jr.eigenvalues);
    spec.frame = std::move(jr.frame);
    spec.delta_deg = delta;
    spec.blocks = degeneracy_blocks(spec.eigenvalues, delta);
    return spec;
}

RVec hermitian_eigenvalues(const CMat& h) {
    if (h.rows() != h.cols() || h.rows() < 1)
        fail(errc::dimension_mismatch, "hermitian_eigenvalues: matrix must be square");
    require_hermitian(h, 1e-10, "hermitian_eigenvalues");
    JacobiResult jr = jacobi_hermitian(h, false);
    sort_and_fix_phases(jr, false);
    return jr.eigenvalues;
}

CMat tensor_product(const CMat& a, const CMat& b, std::size_t dim_cap) {
    const std::size_t rows = static_cast<std::size_t>(a.rows()) * b.rows();
    const std::size_t cols = static_cast<std::size_t>(a.cols()) * b.cols();
    if (rows > dim_cap || cols > dim_cap)
        fail(errc::dimension_overflow,
             "tensor_product: product dimension " + std::to_string(std::max(rows, cols)) +
                 " exceeds cap " + std::to_string(dim_cap));
    CMat out(rows, cols);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVec tensor_product(const CVec& a, const CVec& b, std::size_t dim_cap) {
    const std::size_t dim = static_cast<std::size_t>(a.size()) * b.size();
    if (dim > dim_cap)
        fail(errc::dimension_overflow, "tensor_product: vector dimension exceeds cap");
    CVec out(dim);
    for (int i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

namespace {

void check_bipartition(Eigen::Index dim, const CMat& frame, int m, int n, const char* where) {
    if (m < 1 || n < 1 || frame.rows() != frame.cols())
        fail(errc::dimension_mismatch, std::string(where) + ": invalid frame shape");
    if (static_cast<Eigen::Index>(m) * n != frame.rows() || dim != frame.rows())
        fail(errc::dimension_mismatch,
             std::string(where) + ": dimension " + std::to_string(dim) + " != m*n = " +
                 std::to_string(static_cast<long long>(m) * n));
}

} // namespace

CMat partial_trace(const CMat& rho, const CMat& frame, int m, int n, Keep keep) {
    check_bipartition(rho.rows(), frame, m, n, "partial_trace");
    if (rho.rows() != rho.cols())
        fail(errc::dimension_mismatch, "partial_trace: rho must be square");
    const CMat c = frame.adjoint() * rho * frame;
    if (keep == Keep::system) {
        CMat out = CMat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < n; ++j) out(i, k) += c(i * n + j, k * n + j);
        return out;
    }
    CMat out = CMat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < m; ++i) out(j, l) += c(i * n + j, i * n + l);
    return out;
}

CMat reduced_pure(const CVec& psi, const CMat& frame, int m, int n, Keep keep) {
    check_bipartition(psi.size(), frame, m, n, "reduced_pure");
    const CVec w = frame.adjoint() * psi;
    // row-major reshape: C(i, j) = w[i*n + j]
    Eigen::Map<const Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        w.data(), m, n);
    if (keep == Keep::system) return c * c.adjoint();
    return c.transpose() * c.conjugate();
}

double trace_distance(const CMat& rho, const CMat& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
        fail(errc::dimension_mismatch, "trace_distance: shape mismatch");
    const RVec vals = hermitian_eigenvalues(rho - sigma);
    const double dist = 0.5 * vals.cwiseAbs().sum();
    return std::clamp(dist, 0.0, 1.0);
}

double purity(const CMat& rho) {
    if (rho.rows() != rho.cols())
        fail(errc::dimension_mismatch, "purity: rho must be square");
    return rho.squaredNorm();  // sum |rho_ij|^2 = tr(rho^2) for Hermitian rho
}

SchmidtForm schmidt(const CVec& psi, const CMat& frame, int m, int n) {
    check_bipartition(psi.size(), frame, m, n, "schmidt");
    validate_state(psi, "schmidt");
    const CVec w = frame.adjoint() * psi;
    Eigen::Matrix<cx, Eigen::Dynamic, Eigen::Dynamic> c(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) c(i, j) = w(i * n + j);

    Eigen::JacobiSVD<CMat> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SchmidtForm out;
    out.coefficients = svd.singularValues().array().square();
    out.left = svd.matrixU();
    out.right = svd.matrixV().conjugate();
    return out;
}

CMat dft_frame(int m, int sign) {
    if (m < 2) fail(errc::dimension_mismatch, "dft_frame: m must be >= 2");
    if (sign != 1 && sign != -1) fail(errc::config_invalid, "dft_frame: sign must be +1 or -1");
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    const double base = 2.0 * M_PI / m * sign;
    CMat f(m, m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k) {
            // reduce k*i mod m first so the phase argument stays small and exact
            const double phase = base * static_cast<double>((static_cast<long long>(k) * i) % m);
            f(i, k) = norm * cx(std::cos(phase), std::sin(phase));
        }
    return f;
}

double min_nonzero_gap(const SpectralDecomposition& spec) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < spec.blocks.size(); ++b) {
        const int prev_end = spec.blocks[b - 1].second - 1;
        const int next_begin = spec.blocks[b].first;
        gap = std::min(gap, spec.eigenvalues(next_begin) - spec.eigenvalues(prev_end));
    }
    return gap;
}

void validate_density(const CMat& rho, const char* where) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        fail(errc::dimension_mismatch, std::string(where) + ": density matrix must be square");
    if (!is_hermitian(rho, 1e-12 * std::max(1.0, max_abs(rho))))
        fail(errc::non_hermitian_input, std::string(where) + ": density matrix not Hermitian");
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-12)
        fail(errc::dimension_mismatch,
             std::string(where) + ": trace " + std::to_string(tr) + " != 1");
    const RVec vals = hermitian_eigenvalues(rho);
    if (vals(0) < -1e-10)
        fail(errc::dimension_mismatch, std::string(where) + ": negative eigenvalue " +
                                           std::to_string(vals(0)));
}

void validate_state(const CVec& psi, const char* where) {
    if (psi.size() < 1) fail(errc::dimension_mismatch, std::string(where) + ": empty state");
    if (std::abs(psi.norm() - 1.0) > 1e-12)
        fail(errc::dimension_mismatch, std::string(where) + ": state is not normalized");
}

} // namespace tpslab::qla
