#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace qkdrates {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Tolerance for exact algebraic identities (unitarity, Weyl relation, traces).
inline constexpr double kAlgebraTol = 1e-12;
/// Tolerance for quantities that pass through an eigensolver.
inline constexpr double kEigenTol = 1e-10;
/// Eigenvalues below this are treated as outside the numerical support.
inline constexpr double kSupportCutoff = 1e-13;

inline cplx root_of_unity(int d, long long power) {
  const long long p = ((power % d) + d) % d;
  const double angle = kTwoPi * static_cast<double>(p) / d;
  return {std::cos(angle), std::sin(angle)};
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const CMatrix& u) {
  return max_abs_diff(u * u.adjoint(), CMatrix::Identity(u.rows(), u.cols()));
}

inline double hermiticity_defect(const CMatrix& h) { return max_abs_diff(h, h.adjoint()); }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Bipartite matrices are ordered A ⊗ B: row index = a * dim_b + b.

inline CMatrix partial_trace_first(const CMatrix& m, int dim_a, int dim_b) {
  CMatrix out = CMatrix::Zero(dim_b, dim_b);
  for (int a = 0; a < dim_a; ++a) out += m.block(a * dim_b, a * dim_b, dim_b, dim_b);
  return out;
}

inline CMatrix partial_trace_second(const CMatrix& m, int dim_a, int dim_b) {
  CMatrix out(dim_a, dim_a);
  for (int a = 0; a < dim_a; ++a)
    for (int a2 = 0; a2 < dim_a; ++a2)
      out(a, a2) = m.block(a * dim_b, a2 * dim_b, dim_b, dim_b).trace();
  return out;
}

struct HermitianSpectrum {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

inline HermitianSpectrum hermitian_eig(const CMatrix& h) {
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Base-2 matrix logarithm restricted to the numerical support; the kernel maps to 0.
inline CMatrix log2_on_support(const HermitianSpectrum& s, double cutoff = kSupportCutoff) {
  RVector logs(s.values.size());
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    logs[i] = s.values[i] > cutoff ? std::log2(s.values[i]) : 0.0;
  return s.vectors * logs.asDiagonal() * s.vectors.adjoint();
}

}  // namespace qkdrates
