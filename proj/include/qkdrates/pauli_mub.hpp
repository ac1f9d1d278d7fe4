#pragma once

// Qudit Pauli group and the three mutually unbiased bases built from it.
//
//   X_d = Σ_k |k+1 mod d⟩⟨k|        (cyclic shift)
//   Z_d = Σ_k ω^k |k⟩⟨k|,  ω = e^{2πi/d}   (clock)
//
// The Z basis is computational, the X basis is the discrete Fourier basis and
// the XZ basis is obtained numerically from the eigendecomposition of X_d Z_d.

#include <qkdrates/errors.hpp>
#include <qkdrates/linalg.hpp>

#include <array>
#include <compare>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qkdrates {

enum class Basis { Z, X, XZ };

inline constexpr std::array<Basis, 3> kAllBases{Basis::Z, Basis::X, Basis::XZ};

inline std::string_view to_string(Basis b) {
  switch (b) {
    case Basis::Z: return "Z";
    case Basis::X: return "X";
    case Basis::XZ: return "XZ";
  }
  return "?";
}

inline Basis parse_basis(std::string_view s) {
  if (s == "Z") return Basis::Z;
  if (s == "X") return Basis::X;
  if (s == "XZ") return Basis::XZ;
  throw ValidationError("unknown basis '" + std::string(s) + "' (expected Z, X or XZ)");
}

/// Exponent pair labelling X^alpha Z^beta; both reduced modulo d.
struct PauliIndex {
  int alpha = 0;
  int beta = 0;

  static PauliIndex reduced(long long alpha, long long beta, int d) {
    detail::require(d >= 2, "dimension must be at least 2");
    auto mod = [d](long long v) { return static_cast<int>(((v % d) + d) % d); };
    return {mod(alpha), mod(beta)};
  }

  [[nodiscard]] int flat(int d) const { return alpha * d + beta; }
  static PauliIndex from_flat(int flat, int d) { return {flat / d, flat % d}; }

  bool is_identity() const { return alpha == 0 && beta == 0; }
  auto operator<=>(const PauliIndex&) const = default;
};

/// A d×d matrix checked to be unitary on construction.
class UnitaryMatrix {
 public:
  static UnitaryMatrix checked(CMatrix m) {
    detail::require(m.rows() == m.cols() && m.rows() >= 1, "unitary matrix must be square");
    if (unitarity_defect(m) > kAlgebraTol)
      throw DomainError("matrix is not unitary to " + std::to_string(kAlgebraTol));
    return UnitaryMatrix(std::move(m));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

 private:
  explicit UnitaryMatrix(CMatrix m) : m_(std::move(m)) {}
  CMatrix m_;
};

inline CMatrix shift_matrix(int d) {
  CMatrix x = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) x((k + 1) % d, k) = 1.0;
  return x;
}

inline CMatrix clock_matrix(int d) {
  CMatrix z = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) z(k, k) = root_of_unity(d, k);
  return z;
}

/// Returns (X_d, Z_d).
inline std::pair<UnitaryMatrix, UnitaryMatrix> make_generators(int d) {
  detail::require(d >= 2, "dimension must be at least 2");
  return {UnitaryMatrix::checked(shift_matrix(d)), UnitaryMatrix::checked(clock_matrix(d))};
}

/// X_d^alpha · Z_d^beta by repeated multiplication.
inline UnitaryMatrix pauli_operator(int d, PauliIndex idx) {
  detail::require(d >= 2, "dimension must be at least 2");
  detail::require(idx.alpha >= 0 && idx.alpha < d && idx.beta >= 0 && idx.beta < d,
                  "Pauli exponents must lie in [0, d-1]");
  const CMatrix x = shift_matrix(d);
  const CMatrix z = clock_matrix(d);
  CMatrix out = CMatrix::Identity(d, d);
  for (int i = 0; i < idx.alpha; ++i) out = out * x;
  for (int i = 0; i < idx.beta; ++i) out = out * z;
  return UnitaryMatrix::checked(std::move(out));
}

struct MubBasis {
  int dim = 0;
  Basis id = Basis::Z;
  CMatrix vectors;             // column j is the j-th basis vector
  std::vector<double> phases;  // eigenvalue phase of column j, in [0, 2π)

  CVector vector(int j) const { return vectors.col(j); }
};

namespace detail {

inline double wrap_phase(double phase) {
  double p = std::fmod(phase, kTwoPi);
  if (p < 0) p += kTwoPi;
  // eigenvalue 1 can come back as 2π - tiny
  if (kTwoPi - p < 1e-9) p = 0.0;
  return p;
}

/// Rotates v so that its largest-magnitude entry is real and positive.
/// Entries within 1e-9 of the maximum magnitude tie; the lowest index wins.
inline void fix_global_phase(Eigen::Ref<CVector> v) {
  const double top = v.cwiseAbs().maxCoeff();
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= top - 1e-9) {
      pivot = i;
      break;
    }
  }
  const cplx p = v[pivot];
  v *= std::conj(p) / std::abs(p);
}

}  // namespace detail

inline MubBasis mub_eigenbasis(int d, Basis id) {
  detail::require(d >= 2, "dimension must be at least 2");
  MubBasis out{d, id, CMatrix::Zero(d, d), std::vector<double>(d, 0.0)};

  switch (id) {
    case Basis::Z:
      out.vectors = CMatrix::Identity(d, d);
      for (int j = 0; j < d; ++j) out.phases[j] = kTwoPi * j / d;
      return out;

    case Basis::X: {
      // f_j = d^{-1/2} Σ_k ω^{-jk} |k⟩ satisfies X f_j = ω^j f_j.
      const double norm = 1.0 / std::sqrt(static_cast<double>(d));
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k)
          out.vectors(k, j) = norm * root_of_unity(d, -static_cast<long long>(j) * k);
        out.phases[j] = kTwoPi * j / d;
      }
      return out;
    }

    case Basis::XZ: {
      const CMatrix xz = shift_matrix(d) * clock_matrix(d);
      Eigen::ComplexEigenSolver<CMatrix> solver(xz);
      if (solver.info() != Eigen::Success)
        throw DegenerateSpectrumError("eigensolver failed for X_d Z_d at d=" + std::to_string(d));

      std::vector<std::pair<double, int>> order(d);
      for (int j = 0; j < d; ++j) order[j] = {detail::wrap_phase(std::arg(solver.eigenvalues()[j])), j};
      std::sort(order.begin(), order.end());

      for (int j = 0; j < d; ++j) {
        const double next = j + 1 < d ? order[j + 1].first : order[0].first + kTwoPi;
        if (next - order[j].first < 1e-9)
          throw DegenerateSpectrumError("X_d Z_d has a degenerate eigenvalue at d=" + std::to_string(d) +
                                        "; the XZ eigenbasis is not canonical");
      }

      for (int j = 0; j < d; ++j) {
        CVector v = solver.eigenvectors().col(order[j].second);
        v.normalize();
        detail::fix_global_phase(v);
        out.vectors.col(j) = v;
        out.phases[j] = order[j].first;
      }
      return out;
    }
  }
  throw ValidationError("unknown basis");
}

/// max_{i,j} | |⟨b1_i|b2_j⟩|² − 1/d |
inline double check_unbiased(const MubBasis& b1, const MubBasis& b2) {
  detail::require(b1.dim == b2.dim, "bases must have the same dimension");
  const CMatrix overlaps = b1.vectors.adjoint() * b2.vectors;
  const double target = 1.0 / b1.dim;
  return (overlaps.cwiseAbs2().array() - target).abs().maxCoeff();
}

/// Full matrix of | |⟨b1_i|b2_j⟩|² − 1/d |.
inline Eigen::MatrixXd unbiasedness_deviation(const MubBasis& b1, const MubBasis& b2) {
  detail::require(b1.dim == b2.dim, "bases must have the same dimension");
  const CMatrix overlaps = b1.vectors.adjoint() * b2.vectors;
  return (overlaps.cwiseAbs2().array() - 1.0 / b1.dim).abs().matrix();
}

/// The generator whose eigenbasis is `id`.
inline CMatrix basis_generator(int d, Basis id) {
  switch (id) {
    case Basis::Z: return clock_matrix(d);
    case Basis::X: return shift_matrix(d);
    case Basis::XZ: return shift_matrix(d) * clock_matrix(d);
  }
  throw ValidationError("unknown basis");
}

}  // namespace qkdrates
