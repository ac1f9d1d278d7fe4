#pragma once

// Finite-key secret-key rates.
//
// With N sifted symbols of which k are sacrificed for parameter estimation, the
// observed error rate Q is inflated by the sampling-without-replacement penalty
//
//   ν(N, k, ε) = sqrt( N (k+1) ln(2/ε) / (k² (N−k)) )
//
// and each bound is maximized over k as max_k (N−k)/N · r_k with
//
//   uncertainty  r_k = log d − h(Q+ν) − (Q+ν) log(d−1) − leak          (2 bases only)
//   renner       r_k = H(X|E)|_{Q+ν} − leak − (2 log d + 3) sqrt(log(2/ε) / (N−k))
//   second-order r_k = H(X|E)|_{Q+ν} − leak + Φ⁻¹(ε²) sqrt(V(X|E)|_{Q+ν} / (N−k))
//
// where leak = f_EC · (h(Q) + Q log(d−1)) uses the observed Q.

#include <qkdrates/asymptotic.hpp>
#include <qkdrates/channel_model.hpp>
#include <qkdrates/entropy.hpp>
#include <qkdrates/errors.hpp>
#include <qkdrates/normal_quantile.hpp>
#include <qkdrates/optimize.hpp>
#include <qkdrates/parallel.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace qkdrates {

enum class Bound { uncertainty, renner, second_order };

inline std::string_view to_string(Bound b) {
  switch (b) {
    case Bound::uncertainty: return "uncertainty";
    case Bound::renner: return "renner";
    case Bound::second_order: return "second-order";
  }
  return "?";
}

inline Bound parse_bound(std::string_view s) {
  if (s == "uncertainty") return Bound::uncertainty;
  if (s == "renner") return Bound::renner;
  if (s == "second-order" || s == "second_order") return Bound::second_order;
  throw ValidationError("unknown bound '" + std::string(s) + "' (expected uncertainty, renner or second-order)");
}

struct FiniteKeyParams {
  int d = 2;
  int mubs = 2;
  double q = 0.0;
  double eps = 1e-10;
  std::int64_t n_sifted = 0;  // N
  double f_ec = 1.0;          // reconciliation efficiency multiplier on the Shannon-limit leak
};

inline void validate(const FiniteKeyParams& p) {
  validate_family(p.d, p.mubs);
  detail::require(p.q >= 0.0 && p.q < 1.0, "Q must lie in [0, 1)");
  detail::require(p.eps > 0.0 && p.eps < 1.0, "eps must lie in (0, 1)");
  detail::require(p.eps * p.eps > 0.0, "eps is too small: eps^2 underflows");
  detail::require(p.n_sifted >= 2, "N must be at least 2");
  detail::require(p.f_ec >= 1.0, "f_ec must be at least 1");
}

inline void validate_bound(Bound b, int mubs) {
  if (b == Bound::uncertainty && mubs != 2)
    throw ValidationError("the uncertainty-relation bound applies to the 2-basis protocol only");
}

inline double serfling_nu(std::int64_t n, std::int64_t k, double eps) {
  if (n < 2) throw DomainError("N must be at least 2");
  if (k < 1 || k > n - 1) throw DomainError("k must lie in [1, N-1]");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return std::sqrt(nd * (kd + 1.0) * std::log(2.0 / eps) / (kd * kd * (nd - kd)));
}

/// Σ ⌈((x_i − y_i) mod d) / d⌉, i.e. the number of positions where the strings differ.
inline std::int64_t error_count(std::span<const int> x, std::span<const int> y, int d) {
  detail::require(d >= 2, "d must be at least 2");
  detail::require(x.size() == y.size(), "error_count: strings have different lengths");
  std::int64_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require(x[i] >= 0 && x[i] < d && y[i] >= 0 && y[i] < d, "error_count: symbol outside [0, d)");
    const int diff = ((x[i] - y[i]) % d + d) % d;
    count += (diff + d - 1) / d;
  }
  return count;
}

/// Memo of (H, V) keyed by (d, mubs, Q rounded to 1e-12). The entropy is evaluated at the
/// rounded Q, so results do not depend on evaluation order. Safe for concurrent use.
class EntropyMemo {
 public:
  ConditionalEntropy get(int d, int mubs, double q) {
    const long long key_q = std::llround(q * 1e12);
    const auto key = std::make_tuple(d, mubs, key_q);
    {
      std::shared_lock lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const ConditionalEntropy value = key_entropy(d, mubs, static_cast<double>(key_q) * 1e-12);
    std::unique_lock lock(mutex_);
    return table_.emplace(key, value).first->second;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::tuple<int, int, long long>, ConditionalEntropy> table_;
};

struct FiniteRateResult {
  FiniteKeyParams params;
  Bound bound = Bound::second_order;
  double rate = 0.0;      // max(raw_rate, 0), bits per sifted symbol
  double raw_rate = 0.0;  // (N−k)/N · r_k at k_opt; -inf when no k is feasible
  std::int64_t k_opt = 0;
  double nu = 0.0;
  double secret_bits = 0.0;  // N · rate = (N − k_opt) · r_k
  bool feasible = false;
};

/// Largest shifted error rate at which H(X|E) is still evaluated. Both channel families
/// reach H = 0 at Q = (d−1)/d; beyond it the three-basis entropy rises again, so the value
/// at Q+ν would no longer be the worst case over error rates up to Q+ν.
inline double max_shifted_q(int d) { return max_q_2mub(d); }

/// r_k in bits per key symbol, or nullopt when Q+ν leaves the bound's domain.
inline std::optional<double> key_rate_at_k(Bound bound, const FiniteKeyParams& p, std::int64_t k, EntropyMemo& memo) {
  const double nu = serfling_nu(p.n_sifted, k, p.eps);
  const double shifted = p.q + nu;
  const double leak = p.f_ec * d_ary_leak(p.d, p.q);
  const double n_key = static_cast<double>(p.n_sifted - k);

  switch (bound) {
    case Bound::uncertainty: {
      if (shifted > 0.5) return std::nullopt;
      return std::log2(static_cast<double>(p.d)) - d_ary_leak(p.d, shifted) - leak;
    }
    case Bound::renner: {
      if (!in_channel_domain(p.d, p.mubs, shifted) || shifted > max_shifted_q(p.d)) return std::nullopt;
      const ConditionalEntropy ce = memo.get(p.d, p.mubs, shifted);
      const double rank_term = 2.0 * std::log2(static_cast<double>(p.d)) + 3.0;
      return ce.h - leak - rank_term * std::sqrt(std::log2(2.0 / p.eps) / n_key);
    }
    case Bound::second_order: {
      if (!in_channel_domain(p.d, p.mubs, shifted) || shifted > max_shifted_q(p.d)) return std::nullopt;
      const ConditionalEntropy ce = memo.get(p.d, p.mubs, shifted);
      return ce.h - leak + normal_quantile(p.eps * p.eps) * std::sqrt(ce.v / n_key);
    }
  }
  return std::nullopt;
}

inline FiniteRateResult evaluate_at_k(Bound bound, const FiniteKeyParams& p, std::int64_t k, EntropyMemo& memo) {
  validate(p);
  validate_bound(bound, p.mubs);
  FiniteRateResult r{p, bound};
  r.k_opt = k;
  r.nu = serfling_nu(p.n_sifted, k, p.eps);
  const auto rk = key_rate_at_k(bound, p, k, memo);
  r.feasible = rk.has_value();
  const double n = static_cast<double>(p.n_sifted);
  r.raw_rate = rk ? (n - static_cast<double>(k)) / n * *rk : -std::numeric_limits<double>::infinity();
  r.rate = std::max(r.raw_rate, 0.0);
  r.secret_bits = n * r.rate;
  return r;
}

/// Maximizes (N−k)/N · r_k over integer k in [1, N−1].
inline FiniteRateResult optimize_bound(Bound bound, const FiniteKeyParams& p, EntropyMemo& memo) {
  validate(p);
  validate_bound(bound, p.mubs);
  const double n = static_cast<double>(p.n_sifted);
  auto objective = [&](std::int64_t k) {
    const auto rk = key_rate_at_k(bound, p, k, memo);
    return rk ? (n - static_cast<double>(k)) / n * *rk : -std::numeric_limits<double>::infinity();
  };
  const IntArgmax best = maximize_integer(objective, 1, p.n_sifted - 1);

  FiniteRateResult r{p, bound};
  r.feasible = best.found();
  r.raw_rate = best.value;
  r.k_opt = best.found() ? best.arg : 0;
  r.nu = best.found() ? serfling_nu(p.n_sifted, best.arg, p.eps) : 0.0;
  r.rate = std::max(best.value, 0.0);
  r.secret_bits = n * r.rate;
  return r;
}

inline FiniteRateResult rate_uncertainty_2mub(const FiniteKeyParams& p) {
  EntropyMemo memo;
  return optimize_bound(Bound::uncertainty, p, memo);
}

inline FiniteRateResult rate_renner(const FiniteKeyParams& p) {
  EntropyMemo memo;
  return optimize_bound(Bound::renner, p, memo);
}

inline FiniteRateResult rate_second_order(const FiniteKeyParams& p) {
  EntropyMemo memo;
  return optimize_bound(Bound::second_order, p, memo);
}

/// `points` values of N spread logarithmically over [nmin, nmax], rounded and deduplicated.
inline std::vector<std::int64_t> make_n_grid(double nmin, double nmax, int points) {
  detail::require(nmin >= 2.0, "nmin must be at least 2");
  detail::require(nmax >= nmin, "nmax must not be below nmin");
  detail::require(nmax <= 9.0e18, "nmax is too large");
  detail::require(points >= 1, "points must be positive");
  std::vector<std::int64_t> grid;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const auto n = static_cast<std::int64_t>(std::llround(std::exp(std::log(nmin) + t * (std::log(nmax) - std::log(nmin)))));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  return grid;
}

/// The bounds that apply to a protocol family, in plotting order.
inline std::vector<Bound> applicable_bounds(int mubs) {
  if (mubs == 2) return {Bound::renner, Bound::second_order, Bound::uncertainty};
  return {Bound::renner, Bound::second_order};
}

/// Rows ordered by d, then bound (in the given order), then N.
inline std::vector<FiniteRateResult> sweep_finite(const std::vector<int>& d_list, int mubs, double q, double eps,
                                                  const std::vector<std::int64_t>& n_grid,
                                                  const std::vector<Bound>& bounds, unsigned threads = 1,
                                                  double f_ec = 1.0) {
  struct Job {
    FiniteKeyParams params;
    Bound bound;
  };
  std::vector<Job> jobs;
  for (int d : d_list)
    for (Bound b : bounds)
      for (std::int64_t n : n_grid) {
        FiniteKeyParams p{d, mubs, q, eps, n, f_ec};
        validate(p);
        validate_bound(b, mubs);
        jobs.push_back({p, b});
      }

  EntropyMemo memo;
  std::vector<FiniteRateResult> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { rows[i] = optimize_bound(jobs[i].bound, jobs[i].params, memo); });
  return rows;
}

}  // namespace qkdrates
