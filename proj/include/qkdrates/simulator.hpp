#pragma once

// Monte-Carlo run of the prepare-and-measure protocol over a Pauli channel.
//
// Alice sends a uniform symbol in a random basis, the channel applies X^α Z^β with
// probability λ_αβ, Bob measures in an independently drawn basis. The X basis carries
// the key; Z (and XZ for three bases) are used for parameter estimation.
//
// What a Pauli error does to a symbol is derived once per (d, bases) from the matrices:
// for basis vectors v_j, the outcome after the error is the unique j' with
// |⟨v_j'| E |v_j⟩|² = 1.

#include <qkdrates/channel_model.hpp>
#include <qkdrates/errors.hpp>
#include <qkdrates/finite_key.hpp>
#include <qkdrates/pauli_mub.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace qkdrates {

/// Uniform draws on top of std::mt19937_64, whose output sequence is fixed by the
/// standard. The conversions below are spelled out so replay is exact on any platform
/// (std::uniform_*_distribution is implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
};

/// Outcome permutations of every Pauli error in every basis of a protocol.
class HarmTable {
 public:
  static HarmTable build(int d, const std::vector<Basis>& bases) {
    detail::require(d >= 2, "d must be at least 2");
    HarmTable t;
    t.d_ = d;
    t.bases_ = bases;
    std::vector<CMatrix> paulis;
    for (int f = 0; f < d * d; ++f) paulis.push_back(pauli_operator(d, PauliIndex::from_flat(f, d)).matrix());

    for (Basis b : bases) {
      const MubBasis mb = mub_eigenbasis(d, b);
      std::vector<int> table(static_cast<std::size_t>(d * d * d));
      for (int f = 0; f < d * d; ++f) {
        const CMatrix overlaps = mb.vectors.adjoint() * paulis[f] * mb.vectors;  // [j', j]
        for (int j = 0; j < d; ++j) {
          Eigen::Index target = 0;
          const double weight = overlaps.col(j).cwiseAbs2().maxCoeff(&target);
          if (std::abs(weight - 1.0) > kEigenTol)
            throw DomainError("Pauli error does not permute the " + std::string(to_string(b)) + " basis");
          table[static_cast<std::size_t>(f * d + j)] = static_cast<int>(target);
        }
      }
      t.tables_.push_back(std::move(table));
    }
    return t;
  }

  int dim() const { return d_; }
  const std::vector<Basis>& bases() const { return bases_; }

  /// Bob's outcome when Alice sent `symbol` in basis slot `slot` and error `e` occurred.
  int outcome(std::size_t slot, PauliIndex e, int symbol) const {
    return tables_[slot][static_cast<std::size_t>(e.flat(d_) * d_ + symbol)];
  }

  bool harms(std::size_t slot, PauliIndex e) const {
    for (int j = 0; j < d_; ++j)
      if (outcome(slot, e, j) != j) return true;
    return false;
  }

  int count_harming(std::size_t slot) const {
    int n = 0;
    for (int f = 0; f < d_ * d_; ++f) n += harms(slot, PauliIndex::from_flat(f, d_)) ? 1 : 0;
    return n;
  }

  std::size_t slot_of(Basis b) const {
    for (std::size_t i = 0; i < bases_.size(); ++i)
      if (bases_[i] == b) return i;
    throw ValidationError("basis not part of this harm table");
  }

 private:
  int d_ = 0;
  std::vector<Basis> bases_;
  std::vector<std::vector<int>> tables_;
};

struct ProtocolConfig {
  int d = 2;
  int mubs = 2;
  double q = 0.0;
  double eps = 1e-10;
  std::int64_t rounds = 1'000'000;
  double key_basis_prob = 0.9;
  std::uint64_t seed = 0;
  Bound bound = Bound::second_order;
  double f_ec = 1.0;
};

inline void validate(const ProtocolConfig& c) {
  validate_family(c.d, c.mubs);
  detail::require(c.q >= 0.0 && c.q < 1.0, "Q must lie in [0, 1)");
  detail::require(c.eps > 0.0 && c.eps < 1.0, "eps must lie in (0, 1)");
  detail::require(c.rounds >= 1, "rounds must be at least 1");
  detail::require(c.key_basis_prob > 0.0 && c.key_basis_prob < 1.0, "key basis probability must lie in (0, 1)");
  detail::require(c.f_ec >= 1.0, "f_ec must be at least 1");
  validate_bound(c.bound, c.mubs);
}

/// Key basis first, then the estimation bases.
inline std::vector<Basis> protocol_bases(int mubs) {
  if (mubs == 2) return {Basis::X, Basis::Z};
  return {Basis::X, Basis::Z, Basis::XZ};
}

inline std::vector<double> basis_probabilities(const ProtocolConfig& c) {
  const auto bases = protocol_bases(c.mubs);
  std::vector<double> p(bases.size(), (1.0 - c.key_basis_prob) / static_cast<double>(bases.size() - 1));
  p[0] = c.key_basis_prob;
  return p;
}

struct BasisTally {
  Basis basis = Basis::Z;
  std::int64_t sifted = 0;
  std::int64_t errors = 0;

  double rate() const { return sifted > 0 ? static_cast<double>(errors) / static_cast<double>(sifted) : 0.0; }
  bool operator==(const BasisTally&) const = default;
};

struct SessionReport {
  std::int64_t rounds = 0;
  std::int64_t n_sifted = 0;
  std::int64_t k_used = 0;
  double empirical_q = 0.0;
  double nu = 0.0;
  Bound chosen_bound = Bound::second_order;
  bool feasible = false;
  double rate = 0.0;         // r_k, bits per key symbol; 0 when infeasible
  double secret_bits = 0.0;  // (N − k) · max(rate, 0)
  std::vector<BasisTally> tallies;

  bool operator==(const SessionReport&) const = default;
};

namespace detail {

struct SiftedRun {
  std::vector<BasisTally> tallies;
};

inline SiftedRun sample_rounds(const ProtocolConfig& c, std::int64_t rounds, const HarmTable& harm) {
  const ChannelCoefficients channel = solve_channel(c.d, c.mubs, c.q);
  std::vector<double> error_cdf(channel.lambda.size());
  std::partial_sum(channel.lambda.begin(), channel.lambda.end(), error_cdf.begin());
  error_cdf.back() = 1.0;

  const std::vector<double> basis_p = basis_probabilities(c);
  std::vector<double> basis_cdf(basis_p.size());
  std::partial_sum(basis_p.begin(), basis_p.end(), basis_cdf.begin());
  basis_cdf.back() = 1.0;

  auto draw = [](RandomStream& rng, const std::vector<double>& cdf) {
    const double u = rng.uniform();
    return static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  RandomStream rng(c.seed);
  SiftedRun run;
  for (Basis b : harm.bases()) run.tallies.push_back({b, 0, 0});

  for (std::int64_t r = 0; r < rounds; ++r) {
    const int symbol = static_cast<int>(rng.below(static_cast<std::uint64_t>(c.d)));
    const std::size_t alice = draw(rng, basis_cdf);
    const std::size_t bob = draw(rng, basis_cdf);
    if (alice != bob) continue;
    const auto e = PauliIndex::from_flat(static_cast<int>(std::min(draw(rng, error_cdf), error_cdf.size() - 1)), c.d);
    const int received = harm.outcome(alice, e, symbol);
    auto& t = run.tallies[alice];
    ++t.sifted;
    if (received != symbol) ++t.errors;
  }
  return run;
}

}  // namespace detail

/// Monte-Carlo estimates of the error rate seen in each basis of the protocol.
inline std::vector<BasisTally> empirical_error_rates(const ProtocolConfig& c, std::int64_t rounds) {
  ProtocolConfig cfg = c;
  cfg.rounds = rounds;
  validate(cfg);
  const HarmTable harm = HarmTable::build(cfg.d, protocol_bases(cfg.mubs));
  return detail::sample_rounds(cfg, rounds, harm).tallies;
}

/// Runs one session. All sifted estimation-basis rounds form the sacrificed sample k;
/// the finite-key bound is evaluated at that k (no optimization) and the pooled
/// estimation error rate.
inline SessionReport run_session(const ProtocolConfig& c) {
  validate(c);
  const HarmTable harm = HarmTable::build(c.d, protocol_bases(c.mubs));
  const auto run = detail::sample_rounds(c, c.rounds, harm);

  SessionReport rep;
  rep.rounds = c.rounds;
  rep.tallies = run.tallies;
  rep.chosen_bound = c.bound;
  std::int64_t est_errors = 0;
  for (std::size_t i = 0; i < run.tallies.size(); ++i) {
    rep.n_sifted += run.tallies[i].sifted;
    if (i == 0) continue;
    rep.k_used += run.tallies[i].sifted;
    est_errors += run.tallies[i].errors;
  }
  if (rep.k_used < 2)
    throw SessionAbortedError("session aborted: only " + std::to_string(rep.k_used) +
                              " sifted estimation symbols (need at least 2)");
  if (rep.n_sifted - rep.k_used < 1) throw SessionAbortedError("session aborted: no sifted key symbols");

  rep.empirical_q = static_cast<double>(est_errors) / static_cast<double>(rep.k_used);
  rep.nu = serfling_nu(rep.n_sifted, rep.k_used, c.eps);

  EntropyMemo memo;
  const FiniteKeyParams params{c.d, c.mubs, rep.empirical_q, c.eps, rep.n_sifted, c.f_ec};
  if (!(params.q < 1.0)) {
    rep.feasible = false;
    return rep;
  }
  const auto rk = key_rate_at_k(c.bound, params, rep.k_used, memo);
  rep.feasible = rk.has_value();
  rep.rate = rk.value_or(0.0);
  rep.secret_bits = static_cast<double>(rep.n_sifted - rep.k_used) * std::max(rep.rate, 0.0);
  return rep;
}

}  // namespace qkdrates
