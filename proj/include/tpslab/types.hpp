#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tpslab {

using cx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Hard cap on any constructed Hilbert-space dimension.
inline constexpr std::size_t kDimCap = std::size_t{1} << 14;

enum class errc {
    non_hermitian_input,
    convergence_failure,
    dimension_overflow,
    dimension_mismatch,
    index_out_of_range,
    non_unitary_basis,
    bad_factorization,
    odd_bath_dimension,
    not_eigenbasis_induced,
    empty_trajectory,
    empty_window,
    insufficient_horizon,
    config_invalid,
    io_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace tpslab
