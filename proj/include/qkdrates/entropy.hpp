#pragma once

// Entropic primitives. All quantities are in bits.

#include <qkdrates/channel_model.hpp>
#include <qkdrates/errors.hpp>
#include <qkdrates/linalg.hpp>
#include <qkdrates/pauli_mub.hpp>

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace qkdrates {

class ProbVector {
 public:
  /// Entries in [-1e-15, 0) are clipped to zero; anything more negative is rejected.
  static ProbVector checked(std::vector<double> w) {
    double total = 0.0;
    for (double& v : w) {
      if (v < 0.0) {
        if (v < -1e-15) throw ValidationError("probability vector has a negative entry");
        v = 0.0;
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kAlgebraTol) throw ValidationError("probability vector does not sum to one");
    return ProbVector(std::move(w));
  }

  std::span<const double> weights() const { return w_; }
  std::size_t size() const { return w_.size(); }

 private:
  explicit ProbVector(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

inline double shannon(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

inline double shannon(const ProbVector& p) { return shannon(p.weights()); }

inline double binary_entropy(double q) {
  detail::require(q >= 0.0 && q <= 1.0, "binary entropy argument must lie in [0, 1]");
  const double p[2] = {q, 1.0 - q};
  return shannon(p);
}

/// h(Q) + Q log2(d-1): the Shannon-limit reconciliation leakage H(X|Y) per symbol.
inline double d_ary_leak(int d, double q) {
  detail::require(d >= 2, "d must be at least 2");
  return binary_entropy(q) + (d > 2 ? q * std::log2(d - 1.0) : 0.0);
}

inline double von_neumann(const CMatrix& rho) {
  const HermitianSpectrum s = hermitian_eig(rho);
  double h = 0.0;
  for (Eigen::Index i = 0; i < s.values.size(); ++i)
    if (s.values[i] > kSupportCutoff) h -= s.values[i] * std::log2(s.values[i]);
  return h;
}

namespace detail {

/// Throws unless every eigenvector of sigma with eigenvalue below the cutoff carries
/// less than 1e-12 of rho's weight.
inline void check_support(const CMatrix& rho, const HermitianSpectrum& sigma) {
  for (Eigen::Index i = 0; i < sigma.values.size(); ++i) {
    if (sigma.values[i] > kSupportCutoff) continue;
    const CVector v = sigma.vectors.col(i);
    const double weight = std::real(v.dot(rho * v));
    if (weight > 1e-12) throw DomainError("relative entropy: support of rho is not contained in support of sigma");
  }
}

struct RelEntropyTerms {
  double d = 0.0;
  double v = 0.0;
};

/// D and V given log2(sigma) on its support. V = Σ_i μ_i ‖(log ρ − log σ − D) u_i‖².
inline RelEntropyTerms rel_entropy_terms(const std::vector<HermitianSpectrum>& rhos, const CMatrix& log_sigma) {
  RelEntropyTerms t;
  std::vector<CMatrix> diffs;
  diffs.reserve(rhos.size());
  for (const auto& s : rhos) {
    CMatrix diff = log2_on_support(s) - log_sigma;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const double mu = s.values[i];
      if (mu <= kSupportCutoff) continue;
      t.d += mu * std::real(s.vectors.col(i).dot(diff * s.vectors.col(i)));
    }
    diffs.push_back(std::move(diff));
  }
  for (std::size_t b = 0; b < rhos.size(); ++b) {
    const auto& s = rhos[b];
    CMatrix centered = diffs[b];
    centered.diagonal().array() -= t.d;
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      const double mu = s.values[i];
      if (mu <= kSupportCutoff) continue;
      t.v += mu * (centered * s.vectors.col(i)).squaredNorm();
    }
  }
  return t;
}

}  // namespace detail

/// D(ρ‖σ) = Tr[ρ(log ρ − log σ)].
inline double rel_entropy(const CMatrix& rho, const CMatrix& sigma) {
  detail::require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), "relative entropy: dimension mismatch");
  const HermitianSpectrum ss = hermitian_eig(sigma);
  detail::check_support(rho, ss);
  return detail::rel_entropy_terms({hermitian_eig(rho)}, log2_on_support(ss)).d;
}

/// V(ρ‖σ) = Tr[ρ(log ρ − log σ − D)²].
inline double rel_entropy_variance(const CMatrix& rho, const CMatrix& sigma) {
  detail::require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), "relative entropy: dimension mismatch");
  const HermitianSpectrum ss = hermitian_eig(sigma);
  detail::check_support(rho, ss);
  return detail::rel_entropy_terms({hermitian_eig(rho)}, log2_on_support(ss)).v;
}

/// Classical-quantum state Σ_x p_x |x⟩⟨x| ⊗ σ_x.
struct CqState {
  int num_symbols = 0;
  int env_dim = 0;
  std::vector<double> weights;
  std::vector<CMatrix> blocks;  // unit-trace σ_x
};

/// σ_XE for the key measurement on Alice's half of the purified Choi state
///   |ψ⟩_ABE = Σ_k √λ_k |Φ_k⟩_AB |k⟩_E,   dim E = d².
/// Measuring A in basis {f_x} leaves BE in d^{-1/2} Σ_k √λ_k P_k |f̄_x⟩ ⊗ |k⟩ with
/// probability 1/d, so σ_x,E[k,k'] = √(λ_k λ_k') ⟨P_k' f̄_x | P_k f̄_x⟩.
inline CqState build_cq_state(const ChannelCoefficients& c, Basis key_basis = Basis::X) {
  const int d = c.dim;
  const MubBasis basis = mub_eigenbasis(d, key_basis);

  std::vector<CMatrix> paulis;
  paulis.reserve(d * d);
  for (int f = 0; f < d * d; ++f) paulis.push_back(pauli_operator(d, PauliIndex::from_flat(f, d)).matrix());

  CqState s{d, d * d, std::vector<double>(d, 1.0 / d), {}};
  s.blocks.reserve(d);
  for (int x = 0; x < d; ++x) {
    const CVector fbar = basis.vectors.col(x).conjugate();
    CMatrix m(d, d * d);
    for (int f = 0; f < d * d; ++f) m.col(f) = std::sqrt(std::max(c.lambda[f], 0.0)) * (paulis[f] * fbar);
    s.blocks.push_back((m.adjoint() * m).transpose());
  }
  return s;
}

struct ConditionalEntropy {
  double h = 0.0;  // H(X|E)
  double v = 0.0;  // V(X|E)
};

/// H(X|E) = −D(ρ_XE‖id_X ⊗ ρ_E) and V(X|E) = V(ρ_XE‖id_X ⊗ ρ_E), evaluated block by block.
inline ConditionalEntropy cond_entropy_and_variance(const CqState& s) {
  detail::require(s.blocks.size() == s.weights.size() && !s.blocks.empty(), "cq state blocks and weights disagree");
  CMatrix rho_e = CMatrix::Zero(s.env_dim, s.env_dim);
  std::vector<HermitianSpectrum> parts;
  parts.reserve(s.blocks.size());
  for (std::size_t x = 0; x < s.blocks.size(); ++x) {
    const CMatrix weighted = s.weights[x] * s.blocks[x];
    rho_e += weighted;
    parts.push_back(hermitian_eig(weighted));
  }
  const HermitianSpectrum se = hermitian_eig(rho_e);
  for (std::size_t x = 0; x < s.blocks.size(); ++x) detail::check_support(s.weights[x] * s.blocks[x], se);
  const auto terms = detail::rel_entropy_terms(parts, log2_on_support(se));
  return {-terms.d, std::max(terms.v, 0.0)};
}

/// H(X|E), V(X|E) of the key basis for the (d, mubs) channel at error rate q.
inline ConditionalEntropy key_entropy(int d, int mubs, double q, Basis key_basis = Basis::X) {
  return cond_entropy_and_variance(build_cq_state(solve_channel(d, mubs, q), key_basis));
}

}  // namespace qkdrates
