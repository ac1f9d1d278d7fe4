#pragma once

// Bell-diagonal adversarial channels for the 2- and 3-basis qudit protocols.
//
// A channel is a probability vector λ over Pauli indices (α, β); it acts as
//   N(ρ) = Σ λ_αβ X^α Z^β ρ (X^α Z^β)†
// and its normalized Choi matrix is Σ λ_αβ |Φ_αβ⟩⟨Φ_αβ|.
//
// Coefficient families at equal error rate Q in every monitored basis:
//   2 bases:  λ_00 = (1-Q)², λ_0β = λ_α0 = Q(1-Q)/(d-1), λ_αβ = Q²/(d-1)²  (α, β > 0)
//   3 bases:  λ_0β = λ_α0 = λ_γγ = λ?, λ_αβ = (Q - 2(d-1)λ?)/((d-2)(d-1)) for α ≠ β > 0,
//             λ_00 = 1 - Q - (d-1)λ?, with λ? the stationary point of the coherent
//             information, i.e. the root of λ?³ = λ_00 · λ_XZ².
//   3 bases, d = 2: the depolarizing channel λ_00 = 1 - 3Q/2, others Q/2.

#include <qkdrates/errors.hpp>
#include <qkdrates/linalg.hpp>
#include <qkdrates/pauli_mub.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace qkdrates {

inline void validate_family(int d, int mubs) {
  detail::require(d >= 2, "d must be at least 2");
  detail::require(mubs == 2 || mubs == 3, "mubs must be 2 or 3");
}

struct ChannelCoefficients {
  int dim = 0;
  int mubs = 0;
  double q = 0.0;
  double lambda_q = 0.0;       // λ? of the family
  std::vector<double> lambda;  // indexed by PauliIndex::flat(dim)

  double at(PauliIndex idx) const { return lambda[idx.flat(dim)]; }
  double at(int alpha, int beta) const { return lambda[alpha * dim + beta]; }
};

namespace detail {

inline void check_probability_vector(const ChannelCoefficients& c) {
  double total = 0.0;
  for (double v : c.lambda) {
    if (!(v >= -1e-15))
      throw DomainError("error rate Q=" + std::to_string(c.q) + " gives a negative channel coefficient");
    total += v;
  }
  if (std::abs(total - 1.0) > kAlgebraTol)
    throw DomainError("channel coefficients do not sum to one");
}

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

/// 3λ? − λ_00 − 2λ_XZ on a log scale; increasing in λ?, zero at the cubic's root.
inline double three_mub_stationarity(int d, double q, double lq) {
  const double l00 = 1.0 - q - (d - 1) * lq;
  const double lxz = (q - 2.0 * (d - 1) * lq) / ((d - 2.0) * (d - 1.0));
  return 3.0 * std::log(lq) - std::log(l00) - 2.0 * std::log(lxz);
}

}  // namespace detail

/// Largest Q accepted by the 2-basis family (fully depolarizing point).
inline double max_q_2mub(int d) { return (d - 1.0) / d; }

/// Residual of λ?³ − (1 − (d−1)λ? − Q)·[(Q − 2(d−1)λ?)/((d−2)(d−1))]².
inline double three_mub_cubic_residual(int d, double q, double lq) {
  const double bracket = (q - 2.0 * (d - 1) * lq) / ((d - 2.0) * (d - 1.0));
  return lq * lq * lq - (1.0 - (d - 1) * lq - q) * bracket * bracket;
}

/// Coherent-information objective of the 3-basis family (bits):
/// log d + Σ λ log λ as a function of λ?.
inline double three_mub_objective(int d, double q, double lq) {
  const double lxz_mass = q - 2.0 * (d - 1) * lq;
  const double lxz = lxz_mass / ((d - 2.0) * (d - 1.0));
  const double l00 = 1.0 - q - (d - 1) * lq;
  double value = std::log2(static_cast<double>(d)) + 3.0 * (d - 1) * detail::xlog2x(lq) + detail::xlog2x(l00);
  if (lxz_mass > 0.0) value += lxz_mass * std::log2(lxz);
  return value;
}

inline ChannelCoefficients solve_2mub(int d, double q) {
  validate_family(d, 2);
  if (!(q >= 0.0 && q <= max_q_2mub(d)))
    throw DomainError("Q=" + std::to_string(q) + " is outside [0, (d-1)/d] for the 2-basis channel");

  ChannelCoefficients c{d, 2, q, q * q / ((d - 1.0) * (d - 1.0)), std::vector<double>(d * d)};
  const double edge = q * (1.0 - q) / (d - 1.0);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      double v = c.lambda_q;
      if (a == 0 && b == 0)
        v = (1.0 - q) * (1.0 - q);
      else if (a == 0 || b == 0)
        v = edge;
      c.lambda[a * d + b] = v;
    }
  }
  detail::check_probability_vector(c);
  return c;
}

/// λ? of the 3-basis family for d > 2: bisection on the log-stationarity
/// condition over the feasible interval, polished by Newton steps on the cubic.
inline double solve_three_mub_lambda(int d, double q) {
  if (q == 0.0) return 0.0;
  const double upper = std::min(q / (2.0 * (d - 1)), (1.0 - q) / (d - 1.0));
  if (!(upper > 0.0)) throw DomainError("no feasible λ? for Q=" + std::to_string(q));

  // The stationarity function runs from -inf at 0 to +inf at the upper end.
  double lo = 0.0;
  double hi = upper;
  for (int it = 0; it < 200 && hi - lo > 1e-300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = detail::three_mub_stationarity(d, q, mid);
    if (g < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);

  for (int it = 0; it < 4; ++it) {
    const double f = three_mub_cubic_residual(d, q, x);
    const double h = std::max(1e-7 * x, 1e-300);
    const double df = (three_mub_cubic_residual(d, q, x + h) - three_mub_cubic_residual(d, q, x - h)) / (2 * h);
    if (df == 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    const double next = x - step;
    if (!(next > lo && next < hi)) break;
    x = next;
    if (std::abs(step) < 1e-18) break;
  }
  return x;
}

inline ChannelCoefficients solve_3mub(int d, double q) {
  validate_family(d, 3);
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("Q=" + std::to_string(q) + " is outside [0, 1)");

  ChannelCoefficients c{d, 3, q, 0.0, std::vector<double>(d * d)};
  if (d == 2) {
    c.lambda_q = q / 2.0;
    c.lambda = {1.0 - 1.5 * q, q / 2.0, q / 2.0, q / 2.0};
    detail::check_probability_vector(c);
    return c;
  }

  const double lq = solve_three_mub_lambda(d, q);
  c.lambda_q = lq;
  const double lxz = (q - 2.0 * (d - 1) * lq) / ((d - 2.0) * (d - 1.0));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      double v = lxz;
      if (a == 0 && b == 0)
        v = 1.0 - q - (d - 1) * lq;
      else if (a == 0 || b == 0 || a == b)
        v = lq;
      c.lambda[a * d + b] = v;
    }
  }
  detail::check_probability_vector(c);
  return c;
}

inline ChannelCoefficients solve_channel(int d, int mubs, double q) {
  validate_family(d, mubs);
  return mubs == 2 ? solve_2mub(d, q) : solve_3mub(d, q);
}

/// True when solve_channel(d, mubs, q) succeeds.
inline bool in_channel_domain(int d, int mubs, double q) {
  if (!(q >= 0.0)) return false;
  if (mubs == 2) return q <= max_q_2mub(d);
  if (d == 2) return q <= 2.0 / 3.0;
  return q < 1.0;
}

/// Fraction of the Pauli mass that changes the outcome of a measurement in `basis`.
/// X^α Z^β is harmful in Z iff α ≠ 0, in X iff β ≠ 0, in XZ iff α ≠ β.
inline double induced_error_rate(const ChannelCoefficients& c, Basis basis) {
  double q = 0.0;
  for (int a = 0; a < c.dim; ++a) {
    for (int b = 0; b < c.dim; ++b) {
      const bool harmful = basis == Basis::Z ? a != 0 : basis == Basis::X ? b != 0 : a != b;
      if (harmful) q += c.at(a, b);
    }
  }
  return q;
}

/// |Φ_αβ⟩ = (id ⊗ X^α Z^β)|Φ̃⟩, |Φ̃⟩ = d^{-1/2} Σ_i |ii⟩.
inline CVector bell_vector(int d, PauliIndex idx) {
  const CMatrix p = pauli_operator(d, idx).matrix();
  CVector v = CVector::Zero(d * d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) v.segment(i * d, d) = norm * p.col(i);
  return v;
}

struct ChoiMatrix {
  int dim = 0;
  CMatrix entries;  // d²×d², unit trace
};

struct DensityMatrix {
  int dim = 0;
  CMatrix entries;

  static DensityMatrix checked(CMatrix m) {
    detail::require(m.rows() == m.cols() && m.rows() >= 1, "density matrix must be square");
    if (hermiticity_defect(m) > kAlgebraTol) throw ValidationError("density matrix is not Hermitian");
    if (std::abs(m.trace() - cplx(1.0)) > kAlgebraTol) throw ValidationError("density matrix trace is not 1");
    const int d = static_cast<int>(m.rows());
    return {d, std::move(m)};
  }

  static DensityMatrix maximally_mixed(int d) { return {d, CMatrix::Identity(d, d) / static_cast<double>(d)}; }

  static DensityMatrix pure(const CVector& v) { return {static_cast<int>(v.size()), v * v.adjoint() / v.squaredNorm()}; }
};

inline ChoiMatrix choi_matrix(const ChannelCoefficients& c) {
  const int d = c.dim;
  CMatrix r = CMatrix::Zero(d * d, d * d);
  for (int f = 0; f < d * d; ++f) {
    const double l = c.lambda[f];
    if (l == 0.0) continue;
    const CVector v = bell_vector(d, PauliIndex::from_flat(f, d));
    r.noalias() += l * (v * v.adjoint());
  }
  return {d, std::move(r)};
}

/// Kraus form Σ λ P ρ P†.
inline DensityMatrix apply_channel(const ChannelCoefficients& c, const DensityMatrix& rho) {
  detail::require(rho.dim == c.dim, "density matrix dimension does not match the channel");
  CMatrix out = CMatrix::Zero(c.dim, c.dim);
  for (int f = 0; f < c.dim * c.dim; ++f) {
    const double l = c.lambda[f];
    if (l == 0.0) continue;
    const CMatrix p = pauli_operator(c.dim, PauliIndex::from_flat(f, c.dim)).matrix();
    out.noalias() += l * (p * rho.entries * p.adjoint());
  }
  return {c.dim, std::move(out)};
}

/// Tr_A[(ρ^T ⊗ id) R] with R = d · R̃ the unnormalized Choi matrix.
inline DensityMatrix apply_choi(const ChoiMatrix& choi, const DensityMatrix& rho) {
  detail::require(rho.dim == choi.dim, "density matrix dimension does not match the channel");
  const int d = choi.dim;
  const CMatrix lifted = kron(rho.entries.transpose(), CMatrix::Identity(d, d)) * (static_cast<double>(d) * choi.entries);
  return {d, partial_trace_first(lifted, d, d)};
}

}  // namespace qkdrates
