#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermi {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

/// Raised when operand sizes disagree (mode counts, bit-vector lengths, ...).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a documented guard is violated: size caps, spectral
/// conditions, validity windows of discretized evaluators.
struct GuardError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Raised when a numerical procedure fails to reach its tolerance.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bits are stored one per byte; value 0 or 1.
using Bits = std::vector<int>;

inline void require_dim(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

inline double op_norm(const CMat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

}  // namespace fermi
